from setuptools import setup

setup(name='pyMakespan',
      version='0.1.0',
      description='Makespan scheduling algorithms with exact bound checks',
      license='GPLv3',
      packages=['pyMakespan', 'pyMakespan.tests'],
      package_data={'pyMakespan.tests': ['fixtures/*.json']},
      install_requires=['click', 'voluptuous', 'networkx'],
      python_requires='>=3.9',
      entry_points={
            'console_scripts': [
                  'pymakespan=pyMakespan.cli:cli',
            ],
      },
      zip_safe=False)
