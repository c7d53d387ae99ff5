"""
Setup script for targetnet

Noise-robust target network update rules (T-soft, AT-soft, CAT-soft) with a
synthetic tracking benchmark and a desk-scale actor-critic harness.
"""

from setuptools import setup, find_packages


def read_readme():
    with open("README.md", "r", encoding="utf-8") as fh:
        return fh.read()


def read_requirements(filename):
    with open(filename, "r") as f:
        return [line.strip() for line in f if line.strip() and not line.startswith("#")]


setup(
    name="targetnet",
    version="0.3.0",
    description="Noise-robust target network update rules for deep reinforcement learning",
    long_description=read_readme(),
    long_description_content_type="text/markdown",

    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.8",

    install_requires=read_requirements("requirements.txt"),
    extras_require={
        "test": read_requirements("requirements-dev.txt"),
    },

    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
    keywords=[
        "reinforcement-learning", "target-network", "soft-update",
        "student-t", "robust-statistics", "actor-critic",
    ],

    entry_points={
        "console_scripts": [
            "targetnet=targetnet.cli:main",
        ],
    },

    data_files=[
        ("config", ["config/default.yaml"]),
    ],

    zip_safe=False,
)
