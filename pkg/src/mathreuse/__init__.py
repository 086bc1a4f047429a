"""Executable taxonomy of mathematical content reuse.

Parse LaTeX formulae, generate obfuscated document pairs with exact ground
truth, run identifier-based reuse detectors and score them with the PAN
plagiarism-detection measures.
"""

__version__ = "0.1.0"
FORMAT_VERSION = 1
