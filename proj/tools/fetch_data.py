#!/usr/bin/env python3
"""Fetch the benchmark datasets from CRAN source tarballs and write them as
CSV files under data/.

Four R packages are downloaded (versions and checksums pinned below), the
.rda data files are extracted in memory, parsed with a minimal reader for
R's serialization format, and the relevant columns are written out:

    crabs.csv / crabs_truth.txt    200 x 5   morphometrics, 4 classes (sp:sex)
    crabs4.csv                     200 x 4   same rows without the CL column
    flea.csv / flea_truth.txt       74 x 6   flea beetles, 3 species
    fvoles.csv / fvoles_truth.txt   86 x 7   female voles, 2 species
    wine.csv / wine_truth.txt      178 x 27  Italian wines, 3 cultivars

Set CRAN_MIRROR to override the download host (default cloud.r-project.org).
Tarballs are cached in data/.cache and reused when the checksum matches.
"""

import gzip
import hashlib
import io
import os
import struct
import sys
import tarfile
import urllib.request

MIRROR = os.environ.get("CRAN_MIRROR", "https://cloud.r-project.org")

# (tarball, sha256, candidate paths under the mirror root)
PACKAGES = {
    "MASS": (
        "MASS_7.3-65.tar.gz",
        "b07ef1e3c364ce56269b4a8a7759cc9f87c876554f91293437bb578cfe38172f",
        ["src/contrib/MASS_7.3-65.tar.gz",
         "src/contrib/Archive/MASS/MASS_7.3-65.tar.gz"],
    ),
    "pgmm": (
        "pgmm_1.2.8.tar.gz",
        "332684278e6433fdcdeeddfedb1dcf53bb8ee379b4b9f452fb48d0abaedf8152",
        ["src/contrib/pgmm_1.2.8.tar.gz",
         "src/contrib/Archive/pgmm/pgmm_1.2.8.tar.gz"],
    ),
    "Flury": (
        "Flury_0.1-3.tar.gz",
        "c0f7b5401bd7af105a86789473bdf756dee1ef1b6aa195965ea84df955daae80",
        ["src/contrib/Flury_0.1-3.tar.gz",
         "src/contrib/Archive/Flury/Flury_0.1-3.tar.gz"],
    ),
    "tourr": (
        "tourr_1.2.6.tar.gz",
        "376061109da64552235fa90abc142a39dea1b45d53f4fe6bcbfe911b8d72977b",
        ["src/contrib/tourr_1.2.6.tar.gz",
         "src/contrib/Archive/tourr/tourr_1.2.6.tar.gz"],
    ),
}


# ---------------------------------------------------------------------------
# Minimal reader for R .rda files (serialization format 2/3, XDR binary).
# Handles the SEXP types needed for plain datasets: atomic vectors, data
# frames, factors, and ALTREP compact integer sequences.

NILSXP, SYMSXP, LISTSXP, CHARSXP = 0, 1, 2, 9
LGLSXP, INTSXP, REALSXP, CPLXSXP, STRSXP, VECSXP, RAWSXP = 10, 13, 14, 15, 16, 19, 24
ALTREP_SXP, NILVALUE_SXP, REFSXP = 238, 254, 255
NA_INT = -2147483648


class Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def read(self, n):
        b = self.data[self.pos:self.pos + n]
        if len(b) != n:
            raise EOFError("unexpected end of RDA stream")
        self.pos += n
        return b

    def u32(self):
        return struct.unpack(">i", self.read(4))[0]

    def f64(self):
        return struct.unpack(">d", self.read(8))[0]


class RObj:
    def __init__(self, value, attrs=None):
        self.value = value
        self.attrs = attrs or {}


class Parser:
    def __init__(self, cur):
        self.cur = cur
        self.refs = []

    def parse_header(self):
        magic = self.cur.read(5)
        if magic not in (b"RDX2\n", b"RDX3\n"):
            raise ValueError("not an RDX2/RDX3 file: %r" % magic)
        if self.cur.read(2) != b"X\n":
            raise ValueError("only XDR format supported")
        version = self.cur.u32()
        self.cur.u32()
        self.cur.u32()
        if version >= 3:
            self.cur.read(self.cur.u32())

    def item(self):
        flags = self.cur.u32()
        typ = flags & 0xFF
        has_attr = bool(flags & 0x200)
        has_tag = bool(flags & 0x400)

        if typ in (NILVALUE_SXP, NILSXP):
            return RObj(None)
        if typ == REFSXP:
            idx = flags >> 8
            if idx == 0:
                idx = self.cur.u32()
            return self.refs[idx - 1]
        if typ == SYMSXP:
            obj = RObj(self.item().value)
            self.refs.append(obj)
            return obj
        if typ == LISTSXP:
            attrs = self.item().value if has_attr else None
            tag = self.item().value if has_tag else None
            car = self.item()
            cdr = self.item()
            pairs = [(tag, car)]
            if isinstance(cdr.value, list):
                pairs.extend(cdr.value)
            elif cdr.value is not None:
                pairs.append((None, cdr))
            del attrs
            return RObj(pairs)
        if typ == CHARSXP:
            n = self.cur.u32()
            if n == -1:
                return RObj(None)
            return RObj(self.cur.read(n).decode("utf-8", "replace"))
        if typ in (LGLSXP, INTSXP):
            n = self.cur.u32()
            vals = [self.cur.u32() for _ in range(n)]
            vals = [None if v == NA_INT else v for v in vals]
            return self.finish(RObj(vals), has_attr)
        if typ == REALSXP:
            n = self.cur.u32()
            return self.finish(RObj([self.cur.f64() for _ in range(n)]), has_attr)
        if typ == CPLXSXP:
            n = self.cur.u32()
            vals = [complex(self.cur.f64(), self.cur.f64()) for _ in range(n)]
            return self.finish(RObj(vals), has_attr)
        if typ == STRSXP:
            n = self.cur.u32()
            return self.finish(RObj([self.item().value for _ in range(n)]), has_attr)
        if typ == VECSXP:
            n = self.cur.u32()
            return self.finish(RObj([self.item() for _ in range(n)]), has_attr)
        if typ == RAWSXP:
            return self.finish(RObj(self.cur.read(self.cur.u32())), has_attr)
        if typ == ALTREP_SXP:
            info = self.item().value
            state = self.item()
            self.item()
            cls = info[0][1].value if info else None
            if cls == "compact_intseq":
                n, start, inc = state.value
                return RObj([int(start + i * inc) for i in range(int(n))])
            if isinstance(cls, str) and cls.startswith("wrap_"):
                return state.value[0][1] if isinstance(state.value, list) else state
            raise ValueError("unsupported ALTREP class: %r" % cls)
        raise ValueError("unsupported SEXP type %d at offset %d" % (typ, self.cur.pos))

    def finish(self, obj, has_attr):
        if has_attr:
            attrs = self.item().value
            if attrs:
                obj.attrs = {tag: car for tag, car in attrs if tag}
        return obj


def simplify(obj):
    cls = obj.attrs.get("class")
    cls = cls.value if isinstance(cls, RObj) else None
    if cls and "factor" in cls:
        levels = obj.attrs["levels"].value
        return [levels[v - 1] if v is not None else None for v in obj.value]
    if cls and "data.frame" in cls:
        return {"names": obj.attrs["names"].value,
                "columns": [simplify(c) for c in obj.value]}
    if isinstance(obj.value, list) and obj.value and isinstance(obj.value[0], RObj):
        return [simplify(v) for v in obj.value]
    return obj.value


def load_rda(raw):
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    elif raw[:3] == b"BZh":
        import bz2
        raw = bz2.decompress(raw)
    elif raw[:6] == b"\xfd7zXZ\x00":
        import lzma
        raw = lzma.decompress(raw)
    p = Parser(Cursor(raw))
    p.parse_header()
    return {tag: simplify(car) for tag, car in p.item().value if tag}


# ---------------------------------------------------------------------------

def fetch(pkg, cache_dir):
    fname, want_sha, paths = PACKAGES[pkg]
    cached = os.path.join(cache_dir, fname)
    if os.path.exists(cached):
        with open(cached, "rb") as fh:
            raw = fh.read()
        if hashlib.sha256(raw).hexdigest() == want_sha:
            return raw
    last_err = None
    for path in paths:
        url = "%s/%s" % (MIRROR.rstrip("/"), path)
        try:
            with urllib.request.urlopen(url, timeout=120) as resp:
                raw = resp.read()
        except Exception as e:
            last_err = e
            continue
        got = hashlib.sha256(raw).hexdigest()
        if got != want_sha:
            raise RuntimeError("%s: checksum mismatch (%s)" % (url, got))
        os.makedirs(cache_dir, exist_ok=True)
        with open(cached, "wb") as fh:
            fh.write(raw)
        return raw
    raise RuntimeError("could not download %s: %s" % (fname, last_err))


def read_member(tarball, member):
    with tarfile.open(fileobj=io.BytesIO(tarball), mode="r:gz") as tf:
        return tf.extractfile(member).read()


def fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, names, columns):
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_labels(path, labels):
    with open(path, "w") as fh:
        for v in labels:
            fh.write("%s\n" % v)


def pick(df, names):
    return [df["columns"][df["names"].index(v)] for v in names]


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    cache_dir = os.path.join(out_dir, ".cache")
    os.makedirs(out_dir, exist_ok=True)

    crabs = load_rda(read_member(fetch("MASS", cache_dir), "MASS/data/crabs.rda"))["crabs"]
    vars5 = ["FL", "RW", "CL", "CW", "BD"]
    write_csv(os.path.join(out_dir, "crabs.csv"), vars5, pick(crabs, vars5))
    vars4 = ["FL", "RW", "CW", "BD"]
    write_csv(os.path.join(out_dir, "crabs4.csv"), vars4, pick(crabs, vars4))
    sp, sex = pick(crabs, ["sp", "sex"])
    write_labels(os.path.join(out_dir, "crabs_truth.txt"),
                 ["%s:%s" % t for t in zip(sp, sex)])

    flea = load_rda(read_member(fetch("tourr", cache_dir), "tourr/data/flea_raw.rda"))["flea_raw"]
    fvars = ["tars1", "tars2", "head", "aede1", "aede2", "aede3"]
    write_csv(os.path.join(out_dir, "flea.csv"), fvars, pick(flea, fvars))
    write_labels(os.path.join(out_dir, "flea_truth.txt"), pick(flea, ["species"])[0])

    voles = load_rda(read_member(fetch("Flury", cache_dir), "Flury/data/f.voles.rda"))["f.voles"]
    vvars = ["Age", "L2.Condylo", "L9.Inc.Foramen", "L7.Alveolar",
             "B3.Zyg", "B4.Interorbital", "H1.Skull"]
    write_csv(os.path.join(out_dir, "fvoles.csv"), vvars, pick(voles, vvars))
    write_labels(os.path.join(out_dir, "fvoles_truth.txt"), pick(voles, ["Species"])[0])

    wine = load_rda(read_member(fetch("pgmm", cache_dir), "pgmm/data/wine.rda"))["wine"]
    wvars = [v for v in wine["names"] if v != "Type"]
    write_csv(os.path.join(out_dir, "wine.csv"), wvars, pick(wine, wvars))
    write_labels(os.path.join(out_dir, "wine_truth.txt"),
                 [str(v) for v in pick(wine, ["Type"])[0]])

    for f in sorted(os.listdir(out_dir)):
        if f.endswith((".csv", ".txt")):
            print(os.path.join(out_dir, f))


if __name__ == "__main__":
    main()
