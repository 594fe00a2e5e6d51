"""Setup package"""

from setuptools import setup, find_packages  # type: ignore

with open("README.md", "r") as fh:
    LONG_DESCRIPTION = fh.read()

setup(
    name="rfclt",
    packages=find_packages(exclude=["tests", "tests.*"]),
    version="0.1.0",
    license="gpl-3.0",
    description="Simulation and verification of central limit theorems for stationary random fields",
    long_description=LONG_DESCRIPTION,
    long_description_content_type="text/markdown",
    keywords=[
        "random fields",
        "central limit theorem",
        "martingale approximation",
        "simulation",
    ],
    python_requires=">=3.9",
    tests_require=[
        "pytest",
        "pytest-asyncio",
        "pytest-mock",
        "hypothesis",
    ],
    install_requires=[
        "async_timeout",
        "jsonschema",
        "numpy",
        "scipy",
    ],
    package_data={"rfclt": ["config.schema.json"]},
    entry_points={
        "console_scripts": ["rfclt=rfclt.cli:main"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Operating System :: OS Independent",
        "License :: OSI Approved :: " "GNU General Public License v3 or later (GPLv3+)",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
    ],
)
