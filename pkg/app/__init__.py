"""hyperapprox - classical and efficient hyperinterpolation of F = K*f"""

__version__ = "0.3.0"
