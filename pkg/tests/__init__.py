# Tests package for gapflow
