"""tracebench: deterministic simulation bench for privacy-aware contact
tracing protocols.

Four protocol backends (a centrally-keyed token scheme, an MPC-style
geolocation matcher, a homomorphic device-log matcher, and a decentralized
ephemeral-identifier scheme) run against one synthetic world with ground-truth
transmission, under configurable attacks, and are scored for utility,
authenticity, privacy leakage, and cost.
"""

__version__ = "0.1.0"
