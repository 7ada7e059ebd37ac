__version__ = "0.1.0"
__description__ = "Weak values, presence verdicts and pointer simulations for pre- and postselected quantum scenarios"
