#include "aeas/connectors.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>

namespace aeas {

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string target; // path + query
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConnectorError("URL lacks a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public Transport {
public:
    explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse send(const HttpRequest& request) override {
        const SplitUrl url = split_url(request.url);
        httplib::Client client(url.origin);
        client.set_connection_timeout(timeout_);
        client.set_read_timeout(timeout_);
        client.set_write_timeout(timeout_);
        client.set_follow_location(true);

        httplib::Headers headers;
        std::string content_type = "application/json";
        for (const auto& [k, v] : request.headers) {
            if (k == "Content-Type") {
                content_type = v;
            } else {
                headers.emplace(k, v);
            }
        }

        httplib::Result result = request.method == "POST"
                                     ? client.Post(url.target, headers, request.body, content_type)
                                     : client.Get(url.target, headers);
        if (!result) {
            throw ConnectorError("HTTP exchange with " + url.origin +
                                 " failed: " + httplib::to_string(result.error()));
        }
        HttpResponse out;
        out.status = result->status;
        out.body = result->body;
        for (const auto& [k, v] : result->headers) {
            std::string key = k;
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            out.headers.emplace(std::move(key), v);
        }
        return out;
    }

private:
    std::chrono::seconds timeout_;
};

} // namespace

std::shared_ptr<Transport> make_http_transport(std::chrono::seconds timeout) {
    return std::make_shared<HttplibTransport>(timeout);
}

} // namespace aeas
