#!/usr/bin/env python3
"""
Standard Python package setup file for journal_indicators.
This is used by pip to install the package in development mode.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="journal-indicators",
    version="1.0.0",
    description="Journal citation indicators estimated from the mean and standard deviation of citations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["journal_indicators*"]),
    package_data={"journal_indicators": ["*.json", "data/*.csv"]},
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Information Analysis",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={
        "console_scripts": [
            "journal-indicators=journal_indicators.__main__:main",
        ],
    },
)
