#!/usr/bin/env python3
# Copyright 2026 The AM-MTEEG Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Packs epoched EEG arrays into an ammteeg trial bundle.

Each input .npz holds one subject (one task):
  X      float array [trials, channels, samples]
  y      int array [trials], labels 0..K-1
  split  optional int array [trials]: 0 unassigned, 1 train, 2 test

Example, BCI Competition IV 2a epoched with MNE beforehand:
  make_bundle.py --sample-rate 250 --classes left,right,feet,tongue \
      --out bci_iv_2a.bundle A01.npz A02.npz ... A09.npz
"""

import argparse
import pathlib
import struct
import sys

import numpy as np

MAGIC = b"AMMTBNDL"
VERSION = 1


def _string(s):
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


def write_bundle(path, tasks, sample_rate, class_names, provenance=""):
    """tasks: list of (task_id, X, y, split or None)."""
    if not tasks:
        raise ValueError("no tasks")
    c, t = tasks[0][1].shape[1:]
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQQd", VERSION, c, t, float(sample_rate)))
        f.write(struct.pack("<I", len(class_names)))
        for name in class_names:
            f.write(_string(name))
        f.write(_string(provenance))
        f.write(struct.pack("<Q", sum(len(y) for _, _, y, _ in tasks)))
        for task_id, x, y, split in tasks:
            if x.ndim != 3 or x.shape[1] != c:
                raise ValueError(f"{task_id}: expected [n, {c}, T], got {x.shape}")
            for i in range(len(y)):
                label = int(y[i])
                if not 0 <= label < len(class_names):
                    raise ValueError(f"{task_id}#{i}: label {label} out of range")
                f.write(_string(task_id))
                f.write(_string(f"{task_id}-{i}"))
                s = 0 if split is None else int(split[i])
                f.write(struct.pack("<IBQQ", label, s, x.shape[1], x.shape[2]))
                f.write(np.ascontiguousarray(x[i], dtype="<f4").tobytes())


def main(argv):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("inputs", nargs="+", type=pathlib.Path)
    p.add_argument("--out", required=True, type=pathlib.Path)
    p.add_argument("--sample-rate", required=True, type=float)
    p.add_argument("--classes", required=True,
                   help="comma separated class names, label order")
    p.add_argument("--provenance", default="")
    a = p.parse_args(argv)

    tasks = []
    for path in a.inputs:
        d = np.load(path)
        split = d["split"] if "split" in d.files else None
        tasks.append((path.stem, d["X"], d["y"], split))
    write_bundle(a.out, tasks, a.sample_rate, a.classes.split(","),
                 a.provenance)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
