#!/usr/bin/env python3
"""Start the mediation service.

Usage: python scripts/run_service.py [--host 127.0.0.1] [--port 8470]
                                     [--data-dir data]
"""
import argparse

import uvicorn

from fairdiv.service import create_app


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8470)
    parser.add_argument("--data-dir", default="data", help="session event-log directory")
    args = parser.parse_args()
    uvicorn.run(create_app(data_dir=args.data_dir), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
