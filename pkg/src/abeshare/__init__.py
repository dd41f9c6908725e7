"""Accountable multi-authority CP-ABE data sharing over a simulated ledger.

Modules:

* ``algebra``        — BN254 groups, pairing, hashing, KDF (compiled kernel
                       with a pure-Python fallback, selected at import)
* ``policy``         — policy parsing, the stack-scan satisfaction judge,
                       LSSS matrices
* ``cpabe``          — decentralized CP-ABE and the hybrid byte-level wrapper
* ``accountability`` — ledger-deliverable encrypted keys with NIZK proofs
* ``ledger``         — deterministic contract emulation: stakes, deposits,
                       verification, slashing, settlement
* ``dsp``            — grant-gated ciphertext storage
* ``protocol``       — five-phase scenario runner with adversary injection
* ``bench``          — size/time sweeps and the backend comparison
* ``cli``            — ``abeshare`` command-line entry point
"""

from abeshare._kernels import BACKEND_NAME

__version__ = "0.1.0"
__all__ = ["BACKEND_NAME", "__version__"]
