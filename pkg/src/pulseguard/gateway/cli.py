"""gateway: bridge one patient's bracelet to the server."""

from __future__ import annotations

import argparse
import signal
import sys
import time


def parse_intervals(text: str | None) -> list[tuple[float, float]]:
    """Parse scripted offline hours like "8-12,20.5-21"."""
    if not text:
        return []
    out = []
    for part in text.split(","):
        a, b = part.split("-")
        out.append((float(a), float(b)))
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gateway")
    parser.add_argument("--listen", default="127.0.0.1:0", help="host:port for device frames")
    parser.add_argument("--server", required=True, help="server base URL")
    parser.add_argument("--patient", required=True, help="patient id")
    parser.add_argument("--token", required=True, help="patient bearer token")
    parser.add_argument("--store", required=True, help="local reading log path")
    parser.add_argument("--pairing-code", required=True)
    parser.add_argument("--t0-ms", type=int, default=0, help="logical epoch")
    parser.add_argument("--time-scale", type=float, default=1.0)
    parser.add_argument(
        "--offline",
        default=None,
        help="scripted offline windows, logical hours since t0 (e.g. 8-12)",
    )
    parser.add_argument(
        "--offline-until",
        type=float,
        default=None,
        help="start offline until this logical hour (shorthand for --offline 0-T)",
    )
    parser.add_argument("--stats-file", default=None)
    parser.add_argument("--announce-port-file", default=None,
                        help="write the bound port here once listening")
    args = parser.parse_args(argv)

    from pulseguard.gateway.service import GatewayService

    offline = parse_intervals(args.offline)
    if args.offline_until is not None:
        offline.append((0.0, args.offline_until))

    host, port = args.listen.rsplit(":", 1)
    service = GatewayService(
        listen_addr=(host, int(port)),
        server_url=args.server,
        patient_id=args.patient,
        token=args.token,
        store_path=args.store,
        pairing_code=args.pairing_code,
        t0_ms=args.t0_ms,
        time_scale=args.time_scale,
        offline_intervals_h=offline,
        stats_path=args.stats_file,
    )
    service.start()
    if args.announce_port_file:
        with open(args.announce_port_file, "w", encoding="utf-8") as fh:
            fh.write(str(service.bound_port))
    print(f"gateway for {args.patient} listening on port {service.bound_port}", flush=True)

    stopping = {"flag": False}

    def _stop(signum, frame):
        stopping["flag"] = True

    signal.signal(signal.SIGTERM, _stop)
    signal.signal(signal.SIGINT, _stop)
    while not stopping["flag"]:
        time.sleep(0.2)
    service.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
