#!/usr/bin/env python3
"""Throughput comparison of the trace-record codec kernels.

Encodes and decodes a synthetic event stream with both the compiled
(Cython) kernel and the pure-Python fallback, and prints records/second
plus the speedup. Run from the repository root after an editable install:

    python3 benchmarks/codec_benchmark.py [--records N] [--repeat R]
"""

import argparse
import random
import statistics
import time

from spanprof import codec
from spanprof import _record_codec_py as pure
from spanprof.recorder import ASB, PSB, SE, SSB

try:
    from spanprof import _record_codec as compiled
except ImportError:
    compiled = None


def synth_events(n, seed=7):
    rng = random.Random(seed)
    events, cycles, depth = [], 0, 0
    for _ in range(n):
        cycles += rng.randint(1, 1000)
        if depth and rng.random() < 0.5:
            events.append((SE, cycles, -1, 0))
            depth -= 1
        else:
            tag = rng.choice((ASB, SSB, PSB))
            stream = -1 if tag == ASB else rng.randint(0, 1 << 20)
            events.append((tag, cycles, stream, rng.randint(0, 4000)))
            depth += 1
    return events


def bench(fn, repeat):
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        timings.append(time.perf_counter() - start)
    return result, min(timings), statistics.median(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", type=int, default=500_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    events = synth_events(args.records)
    kernels = {"pure-python": pure}
    if compiled is not None:
        kernels["cython"] = compiled
    print(f"active kernel at import: {codec.KERNEL}")
    print(f"records: {args.records}, repeat: {args.repeat} (best time shown)")

    results = {}
    encoded = pure.encode_records(events)
    for name, kernel in kernels.items():
        blob, enc_best, _ = bench(lambda k=kernel: k.encode_records(events),
                                  args.repeat)
        assert bytes(blob) == bytes(encoded), f"{name} encoding mismatch"
        decoded, dec_best, _ = bench(
            lambda k=kernel: k.decode_records(bytes(encoded), 0, "<bench>"),
            args.repeat)
        assert list(decoded) == events, f"{name} decoding mismatch"
        results[name] = (enc_best, dec_best)
        print(f"{name:>12}: encode {args.records / enc_best / 1e6:7.2f} "
              f"Mrec/s ({enc_best * 1e3:7.2f} ms)   "
              f"decode {args.records / dec_best / 1e6:7.2f} Mrec/s "
              f"({dec_best * 1e3:7.2f} ms)")

    if compiled is not None:
        enc_py, dec_py = results["pure-python"]
        enc_cy, dec_cy = results["cython"]
        print(f"{'speedup':>12}: encode {enc_py / enc_cy:6.1f}x   "
              f"decode {dec_py / dec_cy:6.1f}x")
    else:
        print("compiled kernel unavailable; only the fallback was measured")


if __name__ == "__main__":
    main()
