"""ecclab: a desk-scale lab pairing counted P-256 keypair generation with
keypair-memorization training runs and closed-form attack-feasibility math."""

__version__ = "0.1.0"
