#pragma once

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "wga/search/search.hpp"
#include "wga/util/base64.hpp"

namespace wga::search {

// Generic JSON search API adapter. Query parameters mirror the tool
// argument names; replies carry "text" / "images" arrays in rank order.
class HttpSearchProvider : public SearchProvider {
public:
    HttpSearchProvider(std::string base_url, std::string api_key)
        : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {}

    std::vector<TextHit> text_search(const std::string& q, const std::string& hl,
                                     int top_k) override {
        httplib::Params params{{"q", q}, {"hl", hl}, {"top_k", std::to_string(top_k)}};
        auto j = get("/text", params);
        std::vector<TextHit> hits;
        for (const auto& je : j.value("text", nlohmann::json::array())) {
            if (static_cast<int>(hits.size()) >= top_k) break;
            hits.push_back({je.value("title", ""), je.value("url", ""), je.value("snippet", ""),
                            std::nullopt});
        }
        return hits;
    }

    std::vector<ImageCandidate> image_search(const std::string& q, const std::string& hl, int num,
                                             const std::string& location) override {
        httplib::Params params{
            {"q", q}, {"hl", hl}, {"num", std::to_string(num)}, {"location", location}};
        auto j = get("/image", params);
        std::vector<ImageCandidate> out;
        for (const auto& je : j.value("images", nlohmann::json::array())) {
            if (static_cast<int>(out.size()) >= num) break;
            ImageCandidate c;
            c.id = static_cast<int>(out.size());
            c.url = je.value("url", "");
            if (je.contains("width")) c.width = je["width"].get<int>();
            if (je.contains("height")) c.height = je["height"].get<int>();
            out.push_back(std::move(c));
        }
        // Fetch bytes individually; a failed fetch leaves bytes absent
        // without dropping the candidate.
        for (auto& c : out) {
            if (c.url.empty()) continue;
            try {
                c.bytes = fetch(c.url);
            } catch (const std::exception&) {
                c.bytes = std::nullopt;
            }
        }
        return out;
    }

private:
    nlohmann::json get(const std::string& path, const httplib::Params& params) {
        httplib::Client client(base_url_);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
        auto res = client.Get(path, params, headers);
        if (!res || res->status < 200 || res->status >= 300)
            throw std::runtime_error("search provider error (status " +
                                     std::to_string(res ? res->status : 0) + ")");
        return nlohmann::json::parse(res->body);
    }

    std::string fetch(const std::string& url) {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw std::runtime_error("bad url: " + url);
        auto path_start = url.find('/', scheme_end + 3);
        std::string host = url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
        httplib::Client client(host);
        client.set_connection_timeout(10);
        auto res = client.Get(path);
        if (!res || res->status != 200)
            throw std::runtime_error("image fetch failed: " + url);
        return res->body;
    }

    std::string base_url_;
    std::string api_key_;
};

}  // namespace wga::search
