"""Paillier cryptosystem, g = n + 1 variant.

Plaintexts live in ``[0, n)``.  Signed integers are carried in the same ring:
a decrypted value ``v > n // 2`` stands for ``v - n`` (see :func:`decode_signed`).

The key holder can encrypt and decrypt through the CRT (``p**2`` and ``q**2``
halves), which is several times faster than the public-key path and produces
ciphertexts with the same distribution.
"""
from __future__ import annotations

import random
import secrets
from dataclasses import dataclass, field

import gmpy2

from .errors import CryptoError, ParameterError

DEFAULT_KEY_BITS = 512
MIN_KEY_BITS = 64
_PRIME_ATTEMPTS = 64


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int
    nsquare: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nsquare", self.n * self.n)

    @property
    def g(self) -> int:
        return self.n + 1

    @property
    def bits(self) -> int:
        return self.n.bit_length()

    def to_bytes(self) -> bytes:
        return self.n.to_bytes((self.n.bit_length() + 7) // 8, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "PaillierPublicKey":
        return cls(int.from_bytes(data, "big"))


@dataclass(frozen=True)
class PaillierPrivateKey:
    public_key: PaillierPublicKey
    p: int
    q: int
    lam: int = field(init=False)
    mu: int = field(init=False)

    def __post_init__(self):
        n = self.public_key.n
        if self.p * self.q != n:
            raise CryptoError("p * q does not match the public modulus")
        lam = (self.p - 1) * (self.q - 1) // int(gmpy2.gcd(self.p - 1, self.q - 1))
        # with g = n + 1, L(g^lam mod n^2) = lam mod n
        mu = int(gmpy2.invert(lam % n, n))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        p2, q2 = self.p * self.p, self.q * self.q
        object.__setattr__(self, "_p2", gmpy2.mpz(p2))
        object.__setattr__(self, "_q2", gmpy2.mpz(q2))
        object.__setattr__(self, "_hp", self._h(self.p, p2))
        object.__setattr__(self, "_hq", self._h(self.q, q2))
        object.__setattr__(self, "_q_inv_p", gmpy2.invert(self.q, self.p))
        object.__setattr__(self, "_q2_inv_p2", gmpy2.invert(q2, p2))

    def _h(self, prime, prime_sq):
        g = self.public_key.g
        lx = (int(gmpy2.powmod(g, prime - 1, prime_sq)) - 1) // prime
        return gmpy2.invert(lx, prime)


@dataclass(frozen=True)
class Ciphertext:
    value: int

    def to_bytes(self, pk: PaillierPublicKey) -> bytes:
        width = (pk.nsquare.bit_length() + 7) // 8
        return int(self.value).to_bytes(width, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Ciphertext":
        return cls(int.from_bytes(data, "big"))


def _default_rng():
    return secrets.SystemRandom()


def _random_prime(bits: int, rng: random.Random) -> int:
    # top two bits set so that the product of two such primes has 2*bits bits
    candidate = rng.getrandbits(bits) | (3 << (bits - 2)) | 1
    p = int(gmpy2.next_prime(candidate))
    if p.bit_length() != bits:
        return 0
    return p


def keygen(bits: int = DEFAULT_KEY_BITS, rng: random.Random | None = None,
           ) -> tuple[PaillierPublicKey, PaillierPrivateKey]:
    """Generate a keypair whose modulus has exactly ``bits`` bits.

    ``rng`` supplies all randomness; pass a seeded ``random.Random`` for
    reproducible keys, or leave it out to draw from the OS.
    """
    if bits < MIN_KEY_BITS or bits % 2:
        raise ParameterError(f"key size must be an even number >= {MIN_KEY_BITS}, got {bits}")
    rng = rng or _default_rng()
    half = bits // 2
    for _ in range(_PRIME_ATTEMPTS):
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if not p or not q or p == q:
            continue
        n = p * q
        if n.bit_length() != bits or gmpy2.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        pk = PaillierPublicKey(n)
        sk = PaillierPrivateKey(pk, p, q)
        _self_test(pk, sk, rng)
        return pk, sk
    raise CryptoError(f"no suitable {bits}-bit modulus after {_PRIME_ATTEMPTS} attempts")


def _self_test(pk, sk, rng):
    for _ in range(3):
        m = rng.randrange(pk.n)
        if decrypt(pk, sk, encrypt(pk, m, rng)) != m:
            raise CryptoError("keypair failed the encrypt/decrypt self-test")
        if decrypt(pk, sk, encrypt(pk, m, rng, private_key=sk)) != m:
            raise CryptoError("keypair failed the CRT encryption self-test")


def _check_plaintext(pk, m):
    if not 0 <= m < pk.n:
        raise ParameterError("plaintext outside [0, n); encode signed values first")


def encrypt(pk: PaillierPublicKey, m: int, rng: random.Random | None = None, *,
            private_key: PaillierPrivateKey | None = None) -> Ciphertext:
    """Encrypt ``m`` with fresh randomness.

    When the caller owns ``private_key`` the n-th power of the randomizer is
    computed through the CRT: modulo ``p**2`` a uniform n-th residue is
    ``u**p`` for uniform ``u`` in ``[1, p)``.
    """
    _check_plaintext(pk, m)
    rng = rng or _default_rng()
    n, n2 = pk.n, pk.nsquare
    if private_key is None:
        while True:
            r = rng.randrange(1, n)
            if gmpy2.gcd(r, n) == 1:
                break
        rn = gmpy2.powmod(r, n, n2)
    else:
        sk = private_key
        rp = gmpy2.powmod(rng.randrange(1, sk.p), sk.p, sk._p2)
        rq = gmpy2.powmod(rng.randrange(1, sk.q), sk.q, sk._q2)
        rn = rq + sk._q2 * ((rp - rq) * sk._q2_inv_p2 % sk._p2)
    return Ciphertext(int((1 + m * n) * rn % n2))


def decrypt(pk: PaillierPublicKey, sk: PaillierPrivateKey, c: Ciphertext) -> int:
    """Recover the plaintext in ``[0, n)`` (CRT path)."""
    value = c.value
    if not 0 < value < pk.nsquare:
        raise CryptoError("ciphertext outside (0, n^2)")
    p, q = sk.p, sk.q
    mp = (gmpy2.powmod(value, p - 1, sk._p2) - 1) // p * sk._hp % p
    mq = (gmpy2.powmod(value, q - 1, sk._q2) - 1) // q * sk._hq % q
    return int(mq + q * ((mp - mq) * sk._q_inv_p % p))


def decrypt_textbook(pk: PaillierPublicKey, sk: PaillierPrivateKey, c: Ciphertext) -> int:
    """Decrypt with the plain ``L(c^lambda) * mu mod n`` formula."""
    n = pk.n
    u = int(gmpy2.powmod(c.value, sk.lam, pk.nsquare))
    return (u - 1) // n * sk.mu % n


def add(pk: PaillierPublicKey, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return Ciphertext(c1.value * c2.value % pk.nsquare)


def scalar_mul(pk: PaillierPublicKey, c: Ciphertext, s: int) -> Ciphertext:
    """Encrypts ``s * m mod n``; negative scalars are reduced into the ring."""
    return Ciphertext(int(gmpy2.powmod(c.value, s % pk.n, pk.nsquare)))


def encode_signed(pk: PaillierPublicKey, v: int) -> int:
    if not -(pk.n // 2) <= v <= pk.n // 2:
        raise ParameterError("signed value does not fit in the plaintext ring")
    return v % pk.n


def decode_signed(pk: PaillierPublicKey, m: int) -> int:
    return m - pk.n if m > pk.n // 2 else m
