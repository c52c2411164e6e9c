#!/usr/bin/env python3
"""
Startup script for the random access coverage depth toolkit.
With arguments it runs the command line (`python start.py exact --matrix FILE`);
without arguments it offers to start the HTTP service or run the system checks.
"""

import subprocess
import sys
import os
from pathlib import Path

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))


def check_dependencies():
    """Check if required dependencies are installed."""
    try:
        import fastapi
        import numpy
        import pandas
        import pydantic
        import dotenv
        print("All dependencies are installed")
        return True
    except ImportError as e:
        print(f" Missing dependency: {e}")
        print("Please run: pip install -r requirements.txt")
        return False


def start_backend():
    """Start the FastAPI service."""
    print("Starting FastAPI service...")

    backend_path = Path("backend")
    if not backend_path.exists():
        print("Backend directory not found")
        return False

    try:
        process = subprocess.Popen([
            sys.executable, "-m", "uvicorn",
            "backend.main:app",
            "--host", "0.0.0.0",
            "--port", "8000",
        ], cwd=".")

        print("Service started at http://localhost:8000")
        print("API documentation available at http://localhost:8000/docs")

        return process
    except Exception as e:
        print(f"Error starting service: {e}")
        return False


def run_system_checks():
    """Run test_system.py in a child process and return its exit code."""
    return subprocess.call([sys.executable, "test_system.py"], cwd=".")


def main():
    """Main function: dispatch to the CLI or show the menu."""
    if not check_dependencies():
        return 1

    if len(sys.argv) > 1:
        from backend.cli import main as cli_main

        return cli_main(sys.argv[1:])

    print("Random Access Coverage Depth")
    print("=" * 50)

    if not os.getenv("RA_THREADS"):
        print("RA_THREADS not set; Monte Carlo and sweeps use every CPU")
        print("Copy env_template.txt to .env to pin threads and the default seed")

    print("\nChoose an option:")
    print("1. Start Service")
    print("2. Run System Checks")
    print("3. Exit")

    choice = input("\nEnter your choice (1-3): ").strip()

    if choice == "1":
        process = start_backend()
        if process:
            try:
                print("\nService running... Press Ctrl+C to stop")
                process.wait()
            except KeyboardInterrupt:
                print("\nStopping service...")
                process.terminate()
        return 0

    if choice == "2":
        return run_system_checks()

    if choice == "3":
        print("Goodbye!")
        return 0

    print("Invalid choice. Please enter 1-3.")
    return 2


if __name__ == "__main__":
    sys.exit(main())
