import setuptools

setuptools.setup(
    name='rssbag',
    version='0.1.0',
    packages=setuptools.find_packages(exclude=('tests', 'tests.*', 'examples', 'examples.*')),
    description='Ranked set sampling bagging of multilayer perceptrons',
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.19.1',
        'pandas>=1.5',
        'scipy>=1.6'
    ],
    extras_require={
        'tests': ['pytest']
    },
    entry_points={
        'console_scripts': ['rssbag = rssbag.cli:main']
    }
)
