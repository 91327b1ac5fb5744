#!/usr/bin/env python3
"""Regenerate the frozen reference p-values used by the battery equivalence tests.

The oracle is the NIST STS C code as redistributed in the `sp80022suite` sdist
(pip). The C sources are copied to a scratch directory, patched so that the
two-valued kinds (cumulative sums, serial) and every non-overlapping template
report all of their p-values instead of the minimum, compiled with the system
C compiler and run on the input files listed below.

Inputs written to tests/data/:
  const_e.bin, const_pi.bin, const_sqrt2.bin, const_sqrt3.bin
      first 10^6 bits of the binary expansions (integer part included),
      MSB-first, computed with gmpy2.
  mt5489_n100000_s{1,2,3}.bin
      consecutive 10^5-bit blocks of MT19937(seed 5489), words MSB-first.

Outputs:
  reference_pvalues.json   {file: {"n": n, "pvalues": {item_id: p}}}

Usage:
  python3 tests/oracle/reference_sts.py [--sts-sdist PATH.tar.gz]
"""

import argparse
import json
import os
import re
import shutil
import subprocess
import sys
import tarfile
import tempfile

import gmpy2

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.normpath(os.path.join(HERE, "..", "data"))

N_CONST = 1_000_000
N_MT = 100_000


# ---------------------------------------------------------------- input data

def constant_bits(name, nbits):
    gmpy2.get_context().precision = nbits + 64
    if name == "e":
        x = gmpy2.exp(1)
        int_bits = 2
    elif name == "pi":
        x = gmpy2.const_pi()
        int_bits = 2
    elif name == "sqrt2":
        x = gmpy2.sqrt(gmpy2.mpfr(2))
        int_bits = 1
    elif name == "sqrt3":
        x = gmpy2.sqrt(gmpy2.mpfr(3))
        int_bits = 1
    else:
        raise ValueError(name)
    scaled = int(gmpy2.floor(x * gmpy2.mpfr(2) ** (nbits - int_bits)))
    bits = bin(scaled)[2:]
    assert len(bits) == nbits, (name, len(bits))
    return bits


class MT19937:
    def __init__(self, seed):
        self.mt = [0] * 624
        self.mt[0] = seed & 0xFFFFFFFF
        for i in range(1, 624):
            prev = self.mt[i - 1]
            self.mt[i] = (1812433253 * (prev ^ (prev >> 30)) + i) & 0xFFFFFFFF
        self.index = 624

    def _twist(self):
        mt = self.mt
        for i in range(624):
            y = (mt[i] & 0x80000000) | (mt[(i + 1) % 624] & 0x7FFFFFFF)
            v = mt[(i + 397) % 624] ^ (y >> 1)
            if y & 1:
                v ^= 0x9908B0DF
            mt[i] = v
        self.index = 0

    def next(self):
        if self.index >= 624:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= y >> 11
        y ^= (y << 7) & 0x9D2C5680
        y ^= (y << 15) & 0xEFC60000
        y ^= y >> 18
        return y & 0xFFFFFFFF


def mt_stream_bits(seed, nbits):
    gen = MT19937(seed)
    out = []
    while len(out) * 32 < nbits:
        out.append(format(gen.next(), "032b"))
    return "".join(out)[:nbits]


def write_bin(path, bits):
    padded = bits + "0" * (-len(bits) % 8)
    data = bytes(int(padded[i:i + 8], 2) for i in range(0, len(padded), 8))
    with open(path, "wb") as fh:
        fh.write(data)
    with open(path + ".len", "w") as fh:
        fh.write("%d\n" % len(bits))


def read_bin(path):
    with open(path + ".len") as fh:
        n = int(fh.read().strip())
    with open(path, "rb") as fh:
        data = fh.read()
    bits = "".join(format(b, "08b") for b in data)
    return bits[:n]


def make_inputs():
    os.makedirs(DATA, exist_ok=True)
    files = []
    for name in ("e", "pi", "sqrt2", "sqrt3"):
        path = os.path.join(DATA, "const_%s.bin" % name)
        if not os.path.exists(path):
            write_bin(path, constant_bits(name, N_CONST))
        files.append(path)
    stream = None
    for s in (1, 2, 3):
        path = os.path.join(DATA, "mt5489_n%d_s%d.bin" % (N_MT, s))
        if not os.path.exists(path):
            if stream is None:
                stream = mt_stream_bits(5489, 3 * N_MT)
            write_bin(path, stream[(s - 1) * N_MT:s * N_MT])
        files.append(path)
    return files


# ------------------------------------------------------------ reference build

def aperiodic_templates(m):
    out = []
    for v in range(1 << m):
        bits = format(v, "0%db" % m)
        if all(bits[:m - s] != bits[s:] for s in range(1, m)):
            out.append(bits)
    return out


DRIVER = r"""
#include <stdio.h>
#include <stdlib.h>
#include "../include/stat_fncs.h"

double g_cusum[2];
double g_serial[2];
double g_nonoverlap[148];

int main(int argc, char **argv)
{
    FILE *fp = fopen(argv[1], "rb");
    int n = atoi(argv[2]);
    int nbytes = (n + 7) / 8;
    unsigned char *raw = malloc(nbytes);
    BitSequence *eps = malloc(n);
    int i;
    if (fread(raw, 1, nbytes, fp) != (size_t)nbytes) return 2;
    fclose(fp);
    for (i = 0; i < n; i++) eps[i] = (raw[i / 8] >> (7 - i % 8)) & 1;

    printf("frequency %.17g\n", Frequency(n, eps));
    printf("block-frequency %.17g\n", BlockFrequency(128, n, eps));
    CumulativeSums(n, eps);
    printf("cusum-fwd %.17g\n", g_cusum[0]);
    printf("cusum-rev %.17g\n", g_cusum[1]);
    printf("runs %.17g\n", Runs(n, eps));
    printf("longest-run %.17g\n", LongestRunOfOnes(n, eps));
    printf("rank %.17g\n", Rank(n, eps));
    printf("dft %.17g\n", DiscreteFourierTransform(n, eps));
    NonOverlappingTemplateMatchings(9, n, eps);
    for (i = 0; i < 148; i++) printf("nonoverlap#%d %.17g\n", i, g_nonoverlap[i]);
    printf("overlap %.17g\n", OverlappingTemplateMatchings(9, n, eps));
    if (n >= 387840) printf("universal %.17g\n", Universal(n, eps));
    printf("approx-entropy %.17g\n", ApproximateEntropy(10, n, eps));
    Serial(16, n, eps);
    printf("serial-1 %.17g\n", g_serial[0]);
    printf("serial-2 %.17g\n", g_serial[1]);
    printf("linear-complexity %.17g\n", LinearComplexity(500, n, eps));
    return 0;
}
"""


def patch(path, pattern, replacement, decl):
    with open(path) as fh:
        text = fh.read()
    new, count = re.subn(pattern, replacement, text)
    assert count >= 1, (path, pattern)
    with open(path, "w") as fh:
        fh.write(decl + "\n" + new)


def build_reference(sdist, workdir):
    with tarfile.open(sdist) as tar:
        tar.extractall(workdir)
    root = next(os.path.join(workdir, d) for d in os.listdir(workdir)
                if d.startswith("sp80022suite"))
    src = os.path.join(root, "src")
    patch(os.path.join(src, "cusum.c"),
          r"return fmin\(p_value1, p_value2\);",
          "g_cusum[0] = p_value1; g_cusum[1] = p_value2; return fmin(p_value1, p_value2);",
          "extern double g_cusum[2];")
    patch(os.path.join(src, "serial.c"),
          r"return fmin\(p_value1, p_value2\);",
          "g_serial[0] = p_value1; g_serial[1] = p_value2; return fmin(p_value1, p_value2);",
          "extern double g_serial[2];")
    patch(os.path.join(src, "nonOverlappingTemplateMatchings.c"),
          r"(p_value = cephes_igamc\(N/2\.0, chi2/2\.0\);)",
          r"\1 g_nonoverlap[jj] = p_value;",
          "extern double g_nonoverlap[148];")
    with open(os.path.join(src, "driver.c"), "w") as fh:
        fh.write(DRIVER)
    sources = ["driver.c", "cephes.c", "matrix.c", "dfft.c", "frequency.c",
               "blockFrequency.c", "runs.c", "longestRunOfOnes.c", "rank.c",
               "discreteFourierTransform.c", "nonOverlappingTemplateMatchings.c",
               "overlappingTemplateMatchings.c", "universal.c", "linearComplexity.c",
               "approximateEntropy.c", "serial.c", "cusum.c"]
    exe = os.path.join(root, "refsts")
    subprocess.check_call(["cc", "-O2", "-w", "-o", exe] +
                          [os.path.join(src, s) for s in sources] + ["-lm"])
    tdir = os.path.join(root, "templates")
    os.makedirs(tdir, exist_ok=True)
    with open(os.path.join(tdir, "template9"), "w") as fh:
        for t in aperiodic_templates(9):
            fh.write(" ".join(t) + "\n")
    return root, exe


def fetch_sdist(tmp):
    subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                           "--no-binary", ":all:", "sp80022suite==0.0.8", "-d", tmp])
    return next(os.path.join(tmp, f) for f in os.listdir(tmp) if f.endswith(".tar.gz"))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sts-sdist")
    args = ap.parse_args()

    files = make_inputs()
    templates = aperiodic_templates(9)
    assert len(templates) == 148
    tmp = tempfile.mkdtemp()
    try:
        sdist = args.sts_sdist or fetch_sdist(tmp)
        root, exe = build_reference(sdist, tmp)
        result = {}
        for path in files:
            n = len(read_bin(path))
            out = subprocess.check_output([exe, path, str(n)], cwd=root, text=True)
            pv = {}
            for line in out.splitlines():
                key, val = line.split()
                if key.startswith("nonoverlap#"):
                    key = "nonoverlap-" + templates[int(key[len("nonoverlap#"):])]
                pv[key] = float(val)
            result[os.path.basename(path)] = {"n": n, "pvalues": pv}
            print(os.path.basename(path), n, len(pv), file=sys.stderr)
        with open(os.path.join(DATA, "reference_pvalues.json"), "w") as fh:
            json.dump(result, fh, indent=1, sort_keys=True)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


if __name__ == "__main__":
    main()
