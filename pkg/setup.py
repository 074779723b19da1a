from setuptools import find_packages, setup

install_requires = [
    'numpy',
    'scipy>=1.12',
    'mpmath',
    'pandas>=1.5',
    'matplotlib',
    'seaborn',
    'pyyaml',
    'pyaml',
]

setup(
    name='NonMarkov',
    version='1.0.0',
    description='Memory effects of classical semi-Markov processes measured on single-time distributions',
    packages=find_packages(include=['NonMarkov', 'NonMarkov.*']),
    python_requires='>=3.9',
    install_requires=install_requires,
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['nonmarkov = NonMarkov.cli:main']},
    zip_safe=False,
)
