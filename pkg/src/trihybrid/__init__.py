"""Link-level model of digital, hybrid and tri-hybrid MIMO transmitters."""

__version__ = "0.1.0"
