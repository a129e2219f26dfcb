"""pulseguard-admin: bootstrap users and patients against a running server."""

from __future__ import annotations

import argparse
import json
import sys

import httpx


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pulseguard-admin")
    parser.add_argument("--server", required=True, help="server base URL")
    parser.add_argument("--token", required=True, help="admin bearer token")
    sub = parser.add_subparsers(dest="command", required=True)

    p_user = sub.add_parser("create-user")
    p_user.add_argument("--id", required=True)
    p_user.add_argument("--role", required=True, choices=["patient", "family", "clinician", "admin"])
    p_user.add_argument("--link", action="append", default=[], help="linked/assigned patient id")

    p_patient = sub.add_parser("create-patient")
    p_patient.add_argument("--id", required=True)
    p_patient.add_argument("--clinical-json", default="{}", help="clinical fields as JSON")

    args = parser.parse_args(argv)
    headers = {"Authorization": f"Bearer {args.token}"}

    with httpx.Client(base_url=args.server, headers=headers, timeout=10.0) as client:
        if args.command == "create-user":
            resp = client.post(
                "/api/v1/admin/users",
                json={"user_id": args.id, "role": args.role, "linked_patients": args.link},
            )
        else:
            resp = client.post(
                "/api/v1/admin/patients",
                json={"patient_id": args.id, "clinical": json.loads(args.clinical_json)},
            )
    if resp.status_code >= 300:
        print(f"error {resp.status_code}: {resp.text}", file=sys.stderr)
        return 1
    print(json.dumps(resp.json()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
