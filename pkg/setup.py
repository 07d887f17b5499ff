#!/usr/bin/env python
"""
Setup script for the kpsolitons project.
"""

from setuptools import setup, find_packages

# Get the long description from the README file
with open("README.md", encoding="utf-8") as f:
    long_description = f.read()

# Package version
VERSION = "0.1.0"

# Core dependencies
INSTALL_REQUIRES = [
    "networkx>=3.0.0",
    "pydantic>=2.0.0",
    "python-dotenv>=1.0.0",
    "numpy>=1.24.0",
    "scipy>=1.10.0",
    "sympy>=1.12",
    "matplotlib>=3.7.0",
]

# Development and testing dependencies
DEV_REQUIRES = [
    "pytest>=7.0.0",
    "pytest-cov>=4.0.0",
    "flake8>=6.0.0",
    "black>=23.0.0",
]

setup(
    name="kpsolitons",
    version=VERSION,
    description="KP line-soliton contour plots, plabic graphs and Grassmannian reconstruction",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="kpsolitons developers",
    author_email="example@example.com",
    url="https://github.com/example/kpsolitons",
    license="MIT",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="kp-equation solitons grassmannian plabic-graph positroid",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["config", "main"],
    python_requires=">=3.9",
    install_requires=INSTALL_REQUIRES,
    extras_require={
        "dev": DEV_REQUIRES,
    },
    entry_points={
        "console_scripts": [
            "kp=main:main",
        ],
    },
)
