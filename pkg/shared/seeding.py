import hashlib
import random


def derive_seed(master_seed: int, stream_name: str) -> int:
    """Stable 64-bit seed for a named random stream"""
    digest = hashlib.sha256(f"{master_seed}:{stream_name}".encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big')


def rng_stream(master_seed: int, stream_name: str) -> random.Random:
    return random.Random(derive_seed(master_seed, stream_name))
