#include "polar/http.hpp"

#include "polar/error.hpp"

#include <httplib.h>

namespace polar {

namespace {

struct SplitUrl {
    std::string origin;
    std::string path;
};

SplitUrl split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    const auto start = scheme == std::string::npos ? 0 : scheme + 3;
    const auto slash = endpoint.find('/', start);
    if (slash == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

}  // namespace

std::optional<HttpResponse> post_json(const std::string& endpoint,
                                      const std::string& body,
                                      std::chrono::milliseconds timeout) {
    if (endpoint.empty()) return std::nullopt;
    const auto url = split_endpoint(endpoint);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(url.path, body, "application/json");
    if (!res) return std::nullopt;
    return HttpResponse{res->status, res->body};
}

}  // namespace polar
