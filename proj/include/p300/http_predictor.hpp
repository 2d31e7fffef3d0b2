#pragma once
// HTTP transport for the external predictor: POST /complete with a JSON body.
// Include after any Eigen header: httplib pulls in <resolv.h>, whose _res
// macro collides with Eigen parameter names.

#include <chrono>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "p300/word_predictor.hpp"

namespace p300::predict {

class HttpPredictor : public ExternalPredictor {
public:
    /// base_url like "http://127.0.0.1:8080".
    explicit HttpPredictor(std::string base_url, std::chrono::milliseconds timeout = std::chrono::milliseconds(200))
        : base_url_(std::move(base_url)), timeout_(timeout) {
        require(base_url_.starts_with("http://"),
                "predictor url must start with http://: " + base_url_);
    }

    const std::string& url() const { return base_url_; }

    // A fresh client per call keeps the handle stateless across threads.
    std::vector<ScoredWord> complete(const CompletionRequest& req) const override {
        httplib::Client cli(base_url_);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        cli.set_write_timeout(timeout_);
        auto res = cli.Post("/complete", request_to_json(req).dump(), "application/json");
        if (!res) throw ProtocolError("request to " + base_url_ + " failed: " + httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300)
            throw ProtocolError("predictor returned HTTP " + std::to_string(res->status));
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw ProtocolError(std::string("response is not JSON: ") + e.what());
        }
        return response_from_json(body);
    }

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// Serves any predictor over the same protocol. Used by tests and by
/// `p300sim serve-mock`.
inline void mount_predictor(httplib::Server& server, const ExternalPredictor& predictor) {
    server.Post("/complete", [&predictor](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto request = request_from_json(nlohmann::json::parse(req.body));
            res.set_content(response_to_json(predictor.complete(request)).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
        }
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
}

}  // namespace p300::predict
