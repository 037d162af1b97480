#!/usr/bin/env python

import os

from setuptools import setup, find_packages


here = os.path.dirname(__file__)

with open(os.path.join(here, "README.rst"), "r", encoding="utf-8") as f:
    long_description = f.read()


setup(
    name="anisofield",
    description="Anisotropic long-range dependent random fields and their scaling limits",
    long_description=long_description,
    license="BSD",
    keywords="random field long-range dependence scaling limit fractional brownian sheet",
    author="anisofield authors",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"anisofield": ["presets/*.yaml"]},
    include_package_data=True,
    zip_safe=False,
    use_scm_version={"root": here},
    setup_requires=["setuptools_scm >= 1.15"],
    install_requires=[
        "PyYAML >= 3.12",
        "jsonschema >= 2.5.1",
        "jsonpointer >= 2.2",
        "picobox >= 2.2",
        "deepmerge >= 0.1",
        "numpy >= 1.20",
        "scipy >= 1.7",
        'tomli >= 1.1; python_version < "3.11"',
    ],
    entry_points={"console_scripts": ["anisofield = anisofield.__main__:main"]},
    classifiers=[
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: BSD License",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: Implementation :: CPython",
    ],
    python_requires=">=3.8",
)
