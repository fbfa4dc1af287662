"""Classical and quantum two-party protocol models with exact evaluation."""
from __future__ import annotations

from .classical import (
    ClassicalProtocol,
    EnumerationCapError,
    ErrorReport,
    Signature,
    eval_classical,
    first_message_encoding_classical,
    fix_public_coin_classical,
)
from .coins import ABORT
from .games import GameSpec, PowerInput, power_game
from .quantum import (
    QuantumMixture,
    QuantumSafeProtocol,
    eval_quantum,
    first_message_encoding_quantum,
    fix_public_coin_quantum,
    verify_safe,
    verify_secure,
)


def eval_protocol(p, g: GameSpec, d="worst") -> ErrorReport:
    if isinstance(p, ClassicalProtocol):
        return eval_classical(p, g, d)
    return eval_quantum(p, g, d)


def first_message_encoding(p, g: GameSpec, d):
    """Encoding of the starter's input by the first message under d."""
    if isinstance(p, ClassicalProtocol):
        return first_message_encoding_classical(p, d)
    return first_message_encoding_quantum(p, d)


def fix_public_coin(p, g: GameSpec, d):
    """Coinless protocol (a single coin value) with the least distributional error under d."""
    if isinstance(p, ClassicalProtocol):
        return fix_public_coin_classical(p, g, d)[0]
    return fix_public_coin_quantum(p, g, d)[0]
