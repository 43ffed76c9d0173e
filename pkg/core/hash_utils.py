import hashlib


def derive_seed(master: int, *path: int) -> int:
    # 64-bit child seed; stable across platforms and worker counts
    text = ":".join(str(int(p)) for p in (master,) + path)
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
