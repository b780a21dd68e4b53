"""Download larger TNTP networks into the directory the fixtures look in.

    python3 scripts/fetch_networks.py [NAME ...] [--dest DIR]

Files land as ``<NAME>_net.tntp`` and ``<NAME>_trips.tntp`` under ``--dest``,
``$STAP_NETWORK_DIR`` or ``~/.cache/stap/networks``.
"""
import argparse
import os
import sys
import urllib.request
from pathlib import Path

BASE = "https://raw.githubusercontent.com/bstabler/TransportationNetworks/master"

# local name -> (repository folder, file prefix)
NETWORKS = {
    "EMA": ("Eastern-Massachusetts", "EMA"),
    "ChicagoSketch": ("Chicago-Sketch", "ChicagoSketch"),
    "Anaheim": ("Anaheim", "Anaheim"),
    "Philadelphia": ("Philadelphia", "Philadelphia"),
    "ChicagoRegional": ("chicago-regional", "ChicagoRegional"),
}


def fetch(name: str, dest: Path) -> None:
    folder, prefix = NETWORKS[name]
    for kind in ("net", "trips"):
        target = dest / f"{name}_{kind}.tntp"
        if target.exists():
            print(f"{target} exists, skipping")
            continue
        url = f"{BASE}/{folder}/{prefix}_{kind}.tntp"
        print(f"downloading {url}")
        tmp = target.with_suffix(".part")
        with urllib.request.urlopen(url, timeout=120) as resp, open(tmp, "wb") as fh:
            fh.write(resp.read())
        os.replace(tmp, target)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("names", nargs="*", default=["EMA", "ChicagoSketch"],
                   help=f"any of {', '.join(NETWORKS)}")
    p.add_argument("--dest", default=os.environ.get("STAP_NETWORK_DIR")
                   or str(Path.home() / ".cache" / "stap" / "networks"))
    args = p.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in args.names:
        if name not in NETWORKS:
            print(f"unknown network {name!r}", file=sys.stderr)
            failed += 1
            continue
        try:
            fetch(name, dest)
        except OSError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
