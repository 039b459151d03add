#!/usr/bin/env python3
# Copyright 2026 The cxlmu Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Brute-force event trace of the pointer-chase stall budget.

Walks every fabric message of an n-step remote pointer chase on the
host - switch - endpoint line, once with each load going to the endpoint
and once with the whole chase shipped to the endpoint's near core.
Independent of the C++ code; the numbers it prints are frozen into the
acceptance suite.

    python3 pointer_chase_oracle.py            # print the table
    python3 pointer_chase_oracle.py --check    # compare with FROZEN
"""

import argparse
import heapq
import math
import sys

HOP = 150             # per link, per direction
LINKS = 2             # host - switch - endpoint
BANDWIDTH = 8         # bytes per cycle
LINE = 64
NEAR_CPI = 2
NEAR_LOCAL = 40
SUBMIT_OVERHEAD = 20
BODY = 2              # load + counter update per trip

FROZEN = {
    1024: {
        "analytic_baseline_stall": 614400,
        "analytic_offload_stall": 45676,
        "trace_baseline_stall": 622592,
        "trace_offload_window": 45686,
    },
    3: {
        "analytic_baseline_stall": 1800,
        "analytic_offload_stall": 752,
        "trace_baseline_stall": 1824,
        "trace_offload_window": 762,
    },
}


def deliver(issue, nbytes):
    t = issue + LINKS * HOP
    if nbytes:
        t += math.ceil(nbytes / BANDWIDTH)
    return t


class Queue:
    def __init__(self):
        self.heap = []
        self.seq = 0

    def send(self, issue, nbytes, kind, payload=None):
        t = deliver(issue, nbytes)
        heapq.heappush(self.heap, (t, self.seq, kind, payload))
        self.seq += 1

    def pop(self):
        return heapq.heappop(self.heap)


def trace_baseline(n):
    """Each load waits for the previous one; stall = cycles with no data."""
    q = Queue()
    now = 0
    stall = 0
    for _ in range(n):
        q.send(now, 0, "ReadReq")
        t, _, kind, _ = q.pop()
        assert kind == "ReadReq"
        q.send(t, LINE, "ReadResp")
        t, _, kind, _ = q.pop()
        assert kind == "ReadResp"
        stall += t - now
        now = t
    return stall


def trace_offload(n, live_ins=2, live_outs=1):
    """Window from submit to consumption of the slice's results."""
    q = Queue()
    submit = 0
    q.send(submit + SUBMIT_OVERHEAD, 8 * live_ins, "SliceSubmit")
    t, _, kind, _ = q.pop()
    assert kind == "SliceSubmit"
    busy = n * (BODY * NEAR_CPI + NEAR_LOCAL)
    out_bytes = LINE * math.ceil(8 * live_outs / LINE)
    q.send(t + busy, out_bytes, "SliceDone")
    t, _, kind, _ = q.pop()
    assert kind == "SliceDone"
    return t - submit


def table(n):
    rt = 2 * LINKS * HOP
    return {
        "analytic_baseline_stall": n * rt,
        "analytic_offload_stall": rt + n * (NEAR_CPI * BODY + NEAR_LOCAL) + SUBMIT_OVERHEAD,
        "trace_baseline_stall": trace_baseline(n),
        "trace_offload_window": trace_offload(n),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    bad = 0
    for n in sorted(FROZEN):
        got = table(n)
        for k, v in got.items():
            print(f"n={n} {k} = {v}")
            if args.check and FROZEN[n][k] != v:
                print(f"  MISMATCH: frozen {FROZEN[n][k]}")
                bad += 1
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
