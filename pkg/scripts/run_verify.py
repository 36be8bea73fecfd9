#!/usr/bin/env python3
# Selection-set / streak / exchangeability / tau battery.  Defaults match the
# acceptance configuration; forward flags to override, e.g. --check tau

import sys

from rrtlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", "--seed", "2024", "--threads", "4"] + sys.argv[1:]))
