"""hyperstab - hyperexponential time-varying feedback for linear evolution equations."""

__version__ = "0.1.0"
