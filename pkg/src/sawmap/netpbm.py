"""Binary portable-anymap writers (P5 grayscale, P6 color).

Deterministic byte output: fixed header layout, row-major raster,
maxval 255.  These are the figure formats of the sweep command.
"""

import numpy as np


def write_pgm(path, gray):
    """Write a 2-d uint8 array as binary PGM (P5)."""
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    if gray.ndim != 2:
        raise ValueError(f"PGM needs a 2-d array, got shape {gray.shape}")
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(gray.tobytes())


def write_ppm(path, rgb):
    """Write an (h, w, 3) uint8 array as binary PPM (P6)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"PPM needs an (h, w, 3) array, got shape {rgb.shape}")
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())


def read_pnm(path):
    """Read back a binary PGM/PPM written by this module (for tests)."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        dims = fh.readline().split()
        maxval = int(fh.readline())
        if maxval != 255:
            raise ValueError(f"unsupported maxval {maxval}")
        w, h = int(dims[0]), int(dims[1])
        data = np.frombuffer(fh.read(), dtype=np.uint8)
    if magic == b"P5":
        return data.reshape(h, w)
    if magic == b"P6":
        return data.reshape(h, w, 3)
    raise ValueError(f"unsupported magic {magic!r}")
