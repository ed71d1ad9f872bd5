#! /usr/bin/env python3

"""Setup file"""

from setuptools import setup

with open("README.md") as readme:
    long_description = readme.read()

with open('VERSION') as versionf:
    version = versionf.read().strip()

setup(name='singleobs',
      version=version,
      description='Single-observable quantum state tomography simulator and low-rank recovery',
      license='MIT',
      long_description=long_description,
      long_description_content_type="text/markdown",
      packages=['singleobs'],
      python_requires='>=3.8',
      install_requires=['numpy', 'scipy'],
      entry_points={'console_scripts': ['singleobs=singleobs.cli:main']})
