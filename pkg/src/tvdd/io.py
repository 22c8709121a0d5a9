"""Plain file formats: PGM images, one-column CSV signals, index lists.

PGM intensities map linearly to [0, 1]: a pixel ``k`` with maxval ``m``
reads as ``k / m``; writing clips to [0, 1] and rounds ``255 v``.
"""

import numpy as np


class FormatError(ValueError):
    pass


def _tokens(data, start, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    i = start
    n = len(data)
    while len(out) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise FormatError("truncated PGM header")
        if data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        out.append(data[i:j])
        i = j
    return out, i


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _tokens(data, 2, 3)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad PGM dimensions or maxval")
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        payload = data[pos : pos + need]
        if len(payload) < need:
            raise FormatError(f"{path}: truncated payload ({len(payload)} of {need} bytes)")
        pix = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    else:
        body = data[pos:].split()
        if len(body) < w * h:
            raise FormatError(f"{path}: truncated payload ({len(body)} of {w * h} values)")
        try:
            pix = np.array([int(t) for t in body[: w * h]], dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer pixel value") from exc
    if pix.max(initial=0) > maxval:
        raise FormatError(f"{path}: pixel value above maxval")
    return pix.reshape(h, w) / maxval


def quantize(img):
    return np.rint(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255).astype(np.uint8)


def write_pgm(path, img, binary=True):
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM images are two-dimensional")
    q = quantize(img)
    h, w = q.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(b"P5\n%d %d\n255\n" % (w, h))
            fh.write(q.tobytes())
        else:
            fh.write(b"P2\n%d %d\n255\n" % (w, h))
            for row in q:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


def read_csv_signal(path):
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                v = float(s.split(",")[0])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: cannot parse {s!r} as a number") from exc
            if not np.isfinite(v):
                raise FormatError(f"{path}:{lineno}: non-finite value")
            values.append(v)
    if not values:
        raise FormatError(f"{path}: no values")
    return np.array(values)


def write_csv_signal(path, u):
    with open(path, "w") as fh:
        for v in np.ravel(u):
            fh.write(f"{float(v):.17g}\n")


def write_index_set(path, mask):
    """One multi-index per line, in C order."""
    with open(path, "w") as fh:
        for idx in np.argwhere(mask):
            fh.write(" ".join(str(int(i)) for i in idx) + "\n")


def read_index_set(path, shape):
    mask = np.zeros(shape, dtype=bool)
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                idx = tuple(int(t) for t in s.split())
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad index {s!r}") from exc
            if len(idx) != len(shape) or any(not 0 <= i < n for i, n in zip(idx, shape)):
                raise FormatError(f"{path}:{lineno}: index {idx} outside grid {tuple(shape)}")
            mask[idx] = True
    return mask
