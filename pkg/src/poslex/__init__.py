"""poslex: bootstrap a POS-tagged lexicon for a low-resource language
from a tagged corpus of a closely related one."""

__version__ = "0.1.0"
