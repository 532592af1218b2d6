import logging
from typing import List, Optional, Sequence, Tuple

from .errors import ConfigError
from .suites import Suite
from .trace import SimpleTrace, TraceService
from .verify import VerificationReport


class Runner:
    """
    Runs verification suites and assembles their report.

    Every check is traced as it is produced; the report passes when every
    non-informational check passed.
    """

    def __init__(self, suites: List[Suite] = None, trace_service: TraceService = None):
        """
        Initialize the Runner.

        Args:
            suites: Suites to run, in order
            trace_service: Optional trace service for structured tracing
        """
        self.logger = logging.getLogger(__name__)
        self.trace_service = trace_service or SimpleTrace()
        self.suites = list(suites or [])

    def suite_names(self) -> List[str]:
        return [suite.name for suite in self.suites]

    def plan(self, selection: Optional[Sequence[str]] = None) -> List[Tuple[Suite, str]]:
        """
        Resolve a selection of ``suite`` or ``suite.action`` names.

        Without a selection every suite runs its default actions.

        Raises:
            ConfigError: for names that match no suite or action
        """
        by_name = {suite.name: suite for suite in self.suites}
        if not selection:
            return [(suite, action) for suite in self.suites for action in suite.default_names()]
        steps = []
        for item in selection:
            suite_name, _, action = item.strip().partition(".")
            suite = by_name.get(suite_name)
            if suite is None:
                raise ConfigError("suites", f"unknown suite {suite_name!r}; expected one of {sorted(by_name)}")
            if not action:
                steps.extend((suite, name) for name in suite.default_names())
            elif action in suite.names():
                steps.append((suite, action))
            else:
                raise ConfigError("suites", f"suite {suite_name!r} has no action {action!r}")
        return steps

    def run(self, selection: Optional[Sequence[str]] = None) -> VerificationReport:
        """
        Run the selected suite actions.

        Args:
            selection: ``suite`` or ``suite.action`` names; None runs everything

        Returns:
            The merged VerificationReport
        """
        report = VerificationReport()
        current = None
        for suite, action in self.plan(selection):
            if suite is not current:
                if current is not None:
                    self.trace_service.trace_separator()
                self.trace_service.trace_suite_start(suite.name, suite.default_names())
                current = suite
            self.logger.info("running %s.%s", suite.name, action)
            part = suite.run(action)
            for check in part.checks:
                self.trace_service.trace_check(check)
                if not check.passed and not check.informational:
                    self.logger.warning("check %s.%s failed: %s", check.suite, check.name, check.value)
            for label, record in part.fits.items():
                self.trace_service.trace_fit(label, record)
            for entry in part.traction:
                self.trace_service.trace_quadrature(
                    f"traction mode {entry['mode']} m={entry['m']:g} eps={entry['epsilon']:g}",
                    entry["F"] + entry["T"], entry["level"], entry["error"],
                )
            report.merge(part)

        failures = [
            f"{check.suite}.{check.name}"
            for check in report.checks
            if not check.passed and not check.informational
        ]
        self.trace_service.trace_report(report.passed, failures)
        return report
