from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="gapflow",
    version="0.1.0",
    author="Jac Lemieux",
    author_email="jalemieux@gmail.com",
    description="Singular Stokes flow in the gap between two nearly touching particles",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["gapflow", "gapflow.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "sympy>=1.12",
        "pydantic>=2.11.7",
        "colorama>=0.4.6",
        ],
    extras_require={
        "dev": [
            "pytest>=6.0",
            "black>=21.0",
            "flake8>=7.3.0",
            "build>=1.2.2",
        ],
    },
    entry_points={
        "console_scripts": ["gapflow=gapflow.cli:main"],
    },
    keywords="stokes flow, lubrication, asymptotics, resistance matrix, quadrature",
)
