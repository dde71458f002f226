"""Cryptographic primitives shared by the protocol backends.

Hash, keyed PRF, expansion PRG, authenticated encryption for authority-issued
temporary identifiers, and an additively homomorphic public-key scheme with
ciphertext randomization and zero-testing.

The homomorphic scheme is exponent ElGamal over a fixed prime-order subgroup:
decryption is deliberately zero-test only (matching needs "encrypts 0"
detection, nothing more), which is exactly what admits discrete-log-based
schemes where general plaintext recovery is infeasible.  Group parameters are
simulation-grade (160-bit), not production strength.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
import random
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

try:
    from gmpy2 import powmod as _powmod
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _powmod = pow

DIGEST_SIZE = 32
EPHEMERAL_ID_SIZE = 16

# Exact label used to derive a day's broadcast identifiers from the daily key.
BROADCAST_KEY_LABEL = b"broadcast key"


class AuthenticationError(Exception):
    """A temporary identifier failed authenticated decryption."""


# ---------------------------------------------------------------------------
# Hash / PRF / PRG
# ---------------------------------------------------------------------------


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hash_trunc64(data: bytes) -> int:
    """64-bit truncation of SHA-256; the message-space residue used for
    hashed device identifiers."""
    return int.from_bytes(sha256(data)[:8], "big")


def prf(key: bytes, label: bytes) -> bytes:
    """Keyed pseudorandom function (HMAC-SHA256)."""
    if len(key) != DIGEST_SIZE:
        raise ValueError(f"prf key must be {DIGEST_SIZE} bytes, got {len(key)}")
    return _hmac.new(key, label, hashlib.sha256).digest()


def prg(seed: bytes, n: int, block_size: int = EPHEMERAL_ID_SIZE) -> list[bytes]:
    """Expand a seed into n fixed-width blocks with SHAKE-256.

    The output is a stream: prg(seed, m) is blockwise a prefix of
    prg(seed, n) for m <= n.
    """
    if n < 1:
        raise ValueError("prg needs n >= 1 blocks")
    stream = hashlib.shake_256(seed).digest(n * block_size)
    return [stream[i * block_size : (i + 1) * block_size] for i in range(n)]


# ---------------------------------------------------------------------------
# Authenticated temporary identifiers
#
# Wire layout: nonce (12) || AES-GCM ciphertext || tag (16).  Plaintext is
# len(pseudonym) (1) || pseudonym (<= 16) || interval index (4, big endian).
# ---------------------------------------------------------------------------

TEMP_ID_NONCE_SIZE = 12
TEMP_ID_TAG_SIZE = 16
MAX_PSEUDONYM_SIZE = 16


def temp_id_size(pseudonym_len: int) -> int:
    return TEMP_ID_NONCE_SIZE + 1 + pseudonym_len + 4 + TEMP_ID_TAG_SIZE


def encrypt_temp_id(
    key: bytes, pseudonym: bytes, interval_index: int, rng: random.Random
) -> bytes:
    if len(key) != DIGEST_SIZE:
        raise ValueError("symmetric key must be 32 bytes")
    if len(pseudonym) > MAX_PSEUDONYM_SIZE:
        raise ValueError(f"pseudonym longer than {MAX_PSEUDONYM_SIZE} bytes")
    nonce = rng.randbytes(TEMP_ID_NONCE_SIZE)
    plaintext = bytes([len(pseudonym)]) + pseudonym + struct.pack(">I", interval_index)
    return nonce + AESGCM(key).encrypt(nonce, plaintext, None)


def decrypt_temp_id(key: bytes, token: bytes) -> tuple[bytes, int]:
    """Invert encrypt_temp_id; AuthenticationError on wrong key or any
    modification."""
    if len(token) < TEMP_ID_NONCE_SIZE + 1 + 4 + TEMP_ID_TAG_SIZE:
        raise AuthenticationError("token too short")
    nonce, ct = token[:TEMP_ID_NONCE_SIZE], token[TEMP_ID_NONCE_SIZE:]
    try:
        plaintext = AESGCM(key).decrypt(nonce, ct, None)
    except InvalidTag as exc:
        raise AuthenticationError("temporary identifier failed authentication") from exc
    n = plaintext[0]
    if len(plaintext) != 1 + n + 4:
        raise AuthenticationError("malformed plaintext layout")
    pseudonym = plaintext[1 : 1 + n]
    (interval_index,) = struct.unpack(">I", plaintext[1 + n :])
    return pseudonym, interval_index


# ---------------------------------------------------------------------------
# Additively homomorphic scheme with zero-testing (exponent ElGamal)
# ---------------------------------------------------------------------------

# Fixed 160-bit safe-prime group: P = 2Q + 1, generator of the order-Q
# quadratic-residue subgroup.  Simulation-grade parameters.
GROUP_P = 1487547115784556943359692076963932539495315877603
GROUP_Q = 743773557892278471679846038481966269747657938801
GROUP_G = 4

MESSAGE_BITS = 64  # hashed identifiers are reduced into [0, 2^64)
ENC_RANDOM_BITS = 128
RANDOMIZER_BITS = 64

_ELEMENT_BYTES = (GROUP_P.bit_length() + 7) // 8
SCHEME_TAG = "eg-exp-160"


@dataclass(frozen=True)
class HEPublicKey:
    p: int
    q: int
    g: int
    h: int

    @property
    def ciphertext_bytes(self) -> int:
        return 2 * _ELEMENT_BYTES + 1  # c1 || c2 || scheme-tag byte


@dataclass(frozen=True)
class HESecretKey:
    x: int
    public: HEPublicKey


@dataclass(frozen=True)
class HEKeyPair:
    pk: HEPublicKey
    sk: HESecretKey


@dataclass(frozen=True)
class HECiphertext:
    c1: int
    c2: int
    scheme: str = SCHEME_TAG

    def to_bytes(self) -> bytes:
        return (
            b"\x01"
            + self.c1.to_bytes(_ELEMENT_BYTES, "big")
            + self.c2.to_bytes(_ELEMENT_BYTES, "big")
        )


def he_keygen(rng: random.Random) -> HEKeyPair:
    x = rng.randrange(1, GROUP_Q)
    h = int(_powmod(GROUP_G, x, GROUP_P))
    pk = HEPublicKey(p=GROUP_P, q=GROUP_Q, g=GROUP_G, h=h)
    return HEKeyPair(pk=pk, sk=HESecretKey(x=x, public=pk))


def _check_message(m: int) -> None:
    if not 0 <= m < (1 << MESSAGE_BITS):
        raise ValueError(f"plaintext {m} outside message space [0, 2^{MESSAGE_BITS})")


def he_enc(pk: HEPublicKey, m: int, rng: random.Random) -> HECiphertext:
    _check_message(m)
    r = rng.randrange(1, 1 << ENC_RANDOM_BITS)
    c1 = int(_powmod(pk.g, r, pk.p))
    c2 = int(_powmod(pk.g, m, pk.p)) * int(_powmod(pk.h, r, pk.p)) % pk.p
    return HECiphertext(c1=c1, c2=c2)


def he_sub_plain(pk: HEPublicKey, c: HECiphertext, m: int) -> HECiphertext:
    """Homomorphically subtract a known plaintext from the encrypted value."""
    _check_message(m)
    g_neg_m = int(_powmod(pk.g, pk.q - (m % pk.q), pk.p))
    return HECiphertext(c1=c.c1, c2=c.c2 * g_neg_m % pk.p)


def he_randomize(pk: HEPublicKey, c: HECiphertext, rng: random.Random) -> HECiphertext:
    """Ciphertext randomization: an encryption of 0 stays an encryption of 0,
    anything else becomes an encryption of an unpredictable nonzero value."""
    s = rng.randrange(1, 1 << RANDOMIZER_BITS)
    return HECiphertext(c1=int(_powmod(c.c1, s, pk.p)), c2=int(_powmod(c.c2, s, pk.p)))


def he_is_zero(sk: HESecretKey, c: HECiphertext) -> bool:
    """Zero test: the full decryption contract of this scheme."""
    if c.scheme != SCHEME_TAG:
        raise ValueError(f"ciphertext scheme {c.scheme!r} does not match {SCHEME_TAG!r}")
    return int(_powmod(c.c1, sk.x, sk.public.p)) == c.c2 % sk.public.p
