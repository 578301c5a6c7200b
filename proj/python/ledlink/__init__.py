"""Link-level simulator and optimizer for LED intensity-modulated optical links.

Thin re-export of the compiled extension: channel model, DCO-OFDM bit loading,
M-PAM joint waveform design with MMSE equalization, Monte Carlo simulators, and
the experiment drivers that produce the CSV outputs.
"""

try:
    from ledlink import _core
except ImportError:  # build-tree layout: extension sits next to the package dir
    import _core

globals().update(
    {name: getattr(_core, name) for name in dir(_core) if not name.startswith("_")}
)
__all__ = sorted(name for name in dir(_core) if not name.startswith("_"))
__version__ = "1.0.0"
