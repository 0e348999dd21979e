import random

import pytest
from hypothesis import given, settings, strategies as st

from ppts.errors import CryptoError, ParameterError
from ppts.paillier import (Ciphertext, PaillierPublicKey, add, decode_signed, decrypt,
                           decrypt_textbook, encode_signed, encrypt, keygen, scalar_mul)


def test_keygen_512_bit_length():
    pk, sk = keygen(512, random.Random(1))
    assert pk.n.bit_length() == 512
    assert pk.g == pk.n + 1 and pk.g % pk.n == 1
    assert decrypt(pk, sk, encrypt(pk, 0, random.Random(2))) == 0


def test_keygen_seeded_is_reproducible():
    assert keygen(256, random.Random(5))[0] == keygen(256, random.Random(5))[0]


@pytest.mark.parametrize("bits", [63, 65, 32])
def test_keygen_rejects_bad_sizes(bits):
    with pytest.raises(ParameterError):
        keygen(bits)


def test_roundtrip_random_plaintexts(keys256):
    pk, sk = keys256
    rng = random.Random(3)
    for _ in range(100):
        m = rng.randrange(pk.n)
        assert decrypt(pk, sk, encrypt(pk, m, rng)) == m
        assert decrypt(pk, sk, encrypt(pk, m, rng, private_key=sk)) == m


def test_crt_and_textbook_decryption_agree(keys256):
    pk, sk = keys256
    rng = random.Random(8)
    for _ in range(20):
        c = encrypt(pk, rng.randrange(pk.n), rng)
        assert decrypt(pk, sk, c) == decrypt_textbook(pk, sk, c)


def test_small_homomorphisms(keys256):
    pk, sk = keys256
    rng = random.Random(4)
    assert decrypt(pk, sk, add(pk, encrypt(pk, 2, rng), encrypt(pk, 3, rng))) == 5
    assert decrypt(pk, sk, scalar_mul(pk, encrypt(pk, 7, rng), 0)) == 0


def test_additive_homomorphism_200_pairs(keys256):
    pk, sk = keys256
    rng = random.Random(5)
    for _ in range(200):
        a, b = rng.randrange(pk.n), rng.randrange(pk.n)
        assert decrypt(pk, sk, add(pk, encrypt(pk, a, rng), encrypt(pk, b, rng))) == (a + b) % pk.n


def test_scalar_mul_200_pairs(keys256):
    pk, sk = keys256
    rng = random.Random(6)
    for _ in range(200):
        a, s = rng.randrange(pk.n), rng.randrange(-pk.n, pk.n)
        assert decrypt(pk, sk, scalar_mul(pk, encrypt(pk, a, rng), s)) == (s * a) % pk.n


def test_probabilistic_encryption_no_collision(keys256):
    pk, sk = keys256
    rng = random.Random(7)
    seen = {encrypt(pk, 42, rng).value for _ in range(100)}
    seen_crt = {encrypt(pk, 42, rng, private_key=sk).value for _ in range(100)}
    assert len(seen) == 100 and len(seen_crt) == 100


def test_os_entropy_default(keys256):
    pk, sk = keys256
    assert encrypt(pk, 1).value != encrypt(pk, 1).value


@settings(max_examples=60, deadline=None)
@given(st.integers(-(2 ** 200), 2 ** 200))
def test_signed_round_trip(keys256, v):
    pk, sk = keys256
    c = encrypt(pk, encode_signed(pk, v), random.Random(v))
    assert decode_signed(pk, decrypt(pk, sk, c)) == v


def test_signed_subtraction_through_ring(keys256):
    pk, sk = keys256
    rng = random.Random(9)
    c = add(pk, encrypt(pk, 3, rng), encrypt(pk, encode_signed(pk, -10), rng))
    assert decode_signed(pk, decrypt(pk, sk, c)) == -7


def test_out_of_range_inputs(keys256):
    pk, sk = keys256
    with pytest.raises(ParameterError):
        encrypt(pk, pk.n)
    with pytest.raises(ParameterError):
        encrypt(pk, -1)
    with pytest.raises(ParameterError):
        encode_signed(pk, pk.n)
    with pytest.raises(CryptoError):
        decrypt(pk, sk, Ciphertext(0))


def test_serialization(keys256):
    pk, _ = keys256
    c = encrypt(pk, 99, random.Random(1))
    data = c.to_bytes(pk)
    assert len(data) == (pk.nsquare.bit_length() + 7) // 8
    assert Ciphertext.from_bytes(data) == c
    assert PaillierPublicKey.from_bytes(pk.to_bytes()) == pk
