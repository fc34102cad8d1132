"""2D nonisothermal diffuse-interface two-phase flow with the Peng-Robinson EOS."""

__version__ = "0.1.0"
