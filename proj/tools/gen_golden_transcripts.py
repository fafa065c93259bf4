#!/usr/bin/env python3
# Copyright 2026 The SURVIVRS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the golden gesture transcripts in tests/data/golden.

Each transcript is the authoritative event sequence a guide console emits for
one gesture, one canonical JSON object per line. The encoder here is written
independently of the C++ one: sorted keys, no whitespace, normalized values
with exactly six decimals.
"""

import os
import sys

NORM_KEYS = {"width", "radius"}


def fmt(key, v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v + '"'
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.6f" % v
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(fmt(key, x) for x in v) + "]"
    raise TypeError(v)


def encode(event):
    return "{" + ",".join('"%s":%s' % (k, fmt(k, event[k])) for k in sorted(event)) + "}"


class Session:
    def __init__(self):
        self.lines = []
        self.ts = 1_000_000
        self.frame = {"Site": 40, "Vitals": 12}

    def emit(self, type_, stream, **fields):
        e = {"type": type_, "stream": stream, "seq": len(self.lines), "ts_us": self.ts,
             "frame_seq": self.frame[stream]}
        for k, v in fields.items():
            if k in NORM_KEYS:
                v = float(v)
            e[k] = v
        self.lines.append(encode(e))
        self.ts += 33_000
        self.frame[stream] += 1


def pt(x, y):
    return (float(x), float(y))


RED = (255, 0, 0, 255)
GREEN = (0, 200, 80, 255)


def stroke(s, tool, points, stream="Site", color=RED, width=0.004):
    s.emit("BeginShape", stream, tool=tool, point=pt(*points[0]), color=color, width=width)
    for p in points[1:]:
        s.emit("ExtendShape", stream, point=pt(*p))
    s.emit("EndShape", stream)


def pencil_stroke():
    s = Session()
    s.emit("ZoomIn", "Site")
    stroke(s, "Pencil", [(0.2, 0.3), (0.25, 0.32), (0.31, 0.36), (0.4, 0.35)])
    return s


def oval():
    s = Session()
    s.emit("ZoomIn", "Site")
    stroke(s, "Oval", [(0.3, 0.3), (0.45, 0.4), (0.6, 0.5)], color=GREEN)
    return s


def rectangle():
    s = Session()
    s.emit("ZoomIn", "Vitals")
    stroke(s, "Rectangle", [(0.1, 0.6), (0.2, 0.7), (0.35, 0.9)], stream="Vitals")
    return s


def arrow():
    s = Session()
    s.emit("ZoomIn", "Site")
    stroke(s, "Arrow", [(0.8, 0.2), (0.6, 0.4), (0.55, 0.45)], width=0.006)
    return s


def erase():
    s = Session()
    s.emit("ZoomIn", "Site")
    stroke(s, "Pencil", [(0.2, 0.2), (0.4, 0.2)])
    stroke(s, "Rectangle", [(0.6, 0.6), (0.8, 0.8)])
    # Drags across the pencil line only.
    s.emit("Erase", "Site", path=[pt(0.3, 0.1), pt(0.3, 0.3)], radius=0.01)
    return s


def undo_redo():
    s = Session()
    s.emit("ZoomIn", "Site")
    stroke(s, "Oval", [(0.2, 0.2), (0.3, 0.3)])
    stroke(s, "Arrow", [(0.5, 0.5), (0.7, 0.6)])
    s.emit("Undo", "Site")
    s.emit("Undo", "Site")
    s.emit("Redo", "Site")
    return s


def play_pause_screenshot():
    s = Session()
    s.emit("ZoomIn", "Vitals")
    stroke(s, "Pencil", [(0.5, 0.5), (0.55, 0.52)], stream="Vitals")
    s.emit("PlayPauseScreenshot", "Vitals")
    s.emit("PlayPauseScreenshot", "Vitals")
    s.emit("ZoomOut", "Vitals")
    return s


GESTURES = {
    "pencil_stroke": pencil_stroke,
    "oval": oval,
    "rectangle": rectangle,
    "arrow": arrow,
    "erase": erase,
    "undo_redo": undo_redo,
    "play_pause_screenshot": play_pause_screenshot,
}


def main(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for name, build in GESTURES.items():
        with open(os.path.join(out_dir, name + ".jsonl"), "w") as f:
            for line in build().lines:
                f.write(line + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else
         os.path.join(os.path.dirname(__file__), "..", "tests", "data", "golden"))
