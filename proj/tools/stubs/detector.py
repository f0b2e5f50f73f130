#!/usr/bin/env python3
# Copyright 2026 The ECHO Authors
# SPDX-License-Identifier: Apache-2.0
"""Stand-in object detector.

Reads frame descriptors (one JSON object per line, {"frame", "camera",
"people"}) and writes one detection tuple per person found, in the tuple wire
form {"n","v","u","t"}: n is the label, v a confidence, u the camera and t the
frame number. Confidences are derived from the frame number so runs repeat.
"""
import json
import sys


def main(argv):
    if len(argv) != 3:
        print("usage: detector.py INPUT OUTPUT", file=sys.stderr)
        return 2
    out = []
    with open(argv[1]) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            frame = json.loads(line)
            t = int(frame.get("frame", 0))
            cam = str(frame.get("camera", "cam0"))
            for k in range(int(frame.get("people", 0))):
                conf = 0.5 + ((t * 31 + k * 17) % 50) / 100.0
                out.append(json.dumps({"n": "person", "v": conf, "u": cam, "t": t}, separators=(",", ":")))
    with open(argv[2], "w") as f:
        f.write("\n".join(out))
        if out:
            f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
