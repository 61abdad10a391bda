"""Cryptographic primitives used by the aggregation protocol."""

from .ae import AuthenticationError, MalformedCiphertext, ae_decrypt, ae_encrypt, derive_nonce
from .commit import (
    GROUP_ORDER,
    Commitment,
    NotInGroup,
    comm_gen,
    comm_mul,
    comm_product,
    comm_vfy,
    vcomm_gen,
    vcomm_product,
    vcomm_vfy,
)
from .keys import (
    CURVE_ORDER,
    InvalidPublicKey,
    KeyPair,
    ds_gen,
    ds_sign,
    ds_verify,
    ka_derive,
    ka_gen,
    scalar_to_keypair,
)
from .prg import prg_expand
from .shamir import FIELD_PRIME, Share, additive_share, ss_recon, ss_share

__all__ = [
    "AuthenticationError",
    "CURVE_ORDER",
    "Commitment",
    "FIELD_PRIME",
    "GROUP_ORDER",
    "InvalidPublicKey",
    "KeyPair",
    "MalformedCiphertext",
    "NotInGroup",
    "Share",
    "additive_share",
    "ae_decrypt",
    "ae_encrypt",
    "comm_gen",
    "comm_mul",
    "comm_product",
    "comm_vfy",
    "derive_nonce",
    "ds_gen",
    "ds_sign",
    "ds_verify",
    "ka_derive",
    "ka_gen",
    "prg_expand",
    "scalar_to_keypair",
    "ss_recon",
    "ss_share",
    "vcomm_gen",
    "vcomm_product",
    "vcomm_vfy",
]
