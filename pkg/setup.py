#!/usr/bin/env python3
"""Setup script for kreiss-lab."""

from setuptools import setup

if __name__ == "__main__":
    setup(
        name="kreiss-lab",
        version="0.1.0",
        description="Numerical lab for Kreiss-type conditions and power growth of convolution operators on l^p",
        long_description=open("README.md").read(),
        long_description_content_type="text/markdown",
        packages=["src"],
        python_requires=">=3.9",
        install_requires=[
            "numpy>=1.22",
            "scipy>=1.9",
            "psutil>=5.8.0",
            "tomli>=2.0.0; python_version < '3.11'",
        ],
        extras_require={
            "dev": [
                "pytest>=7.0.0",
                "ruff>=0.1.0",
                "black>=23.0.0",
            ],
        },
        entry_points={
            "console_scripts": [
                "kreiss-lab=src.main:main",
            ],
        },
    )
