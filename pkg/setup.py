from setuptools import find_packages, setup

setup(
    name='lorentzlab',
    version='0.3.0',
    author='lorentzlab developers',
    description='A numerical laboratory for nonsmooth Lorentzian geometry',
    long_description=open('README.md').read(),
    license='GPL',
    keywords='lorentzian geometry optimal transport timed curvature',
    classifiers=[
        'Environment :: Console',
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Operating System :: POSIX',
        'Operating System :: MacOS :: MacOS X',
        'Programming Language :: Python',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    packages=find_packages(exclude=['examples', 'examples.*']),
    package_data={
        'lorentzlab': ['data/*'],
        'lorentzlab.test_lab': ['test_data/*.json'],
    },
    entry_points={
        'console_scripts': [
            'lorentzlab = lorentzlab.lorentzlab:main',
            'lorentzlab-batch = lorentzlab.batch_run:main',
        ]
    },
    install_requires=[
        'numpy',
        'networkx',
        'requests',
        'six',
        'tqdm',
        'z3-solver',
    ],
    extras_require={
        'tests': ['pytest', 'scipy'],
    },
)
