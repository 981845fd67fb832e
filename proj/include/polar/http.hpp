#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace polar {

struct HttpResponse {
    int status = 0;
    std::string body;
};

// POSTs a JSON body to `endpoint` ("http://host:port/path"). Returns nullopt
// on transport failure or timeout; HTTP error statuses are returned as-is.
std::optional<HttpResponse> post_json(const std::string& endpoint,
                                      const std::string& body,
                                      std::chrono::milliseconds timeout);

}  // namespace polar
