"""Square power classes of biquadratic extensions as Klein four-group modules."""

__version__ = "0.1.0"
