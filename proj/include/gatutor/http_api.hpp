#pragma once

// HTTP/1.1 binding of TutorService. Routes and bodies are documented in
// docs/api.md.

#include <functional>
#include <optional>
#include <string>

#include "httplib.h"

#include "gatutor/tutor_service.hpp"

namespace gatutor::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline json body_object(const httplib::Request& req) {
    if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ServiceError(Errc::BadRequest, "request body must be a JSON object");
    return j;
}

inline std::optional<std::string> query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
}

// Maps service errors to their status codes and anything else to 500.
inline httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const ServiceError& e) {
            send_json(res, e.status(), e.body());
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
        }
    };
}

}  // namespace detail

inline void mount(httplib::Server& srv, TutorService& svc) {
    using detail::guarded;
    using detail::send_json;
    using Req = httplib::Request;
    using Res = httplib::Response;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    srv.Options(R"(/.*)", [](const Req&, Res& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    srv.Get("/problems", guarded([&svc](const Req& req, Res& res) {
        send_json(res, 200, svc.list_problems(detail::query(req, "session")));
    }));

    srv.Post("/sessions", guarded([&svc](const Req& req, Res& res) {
        json body = detail::body_object(req);
        auto it = body.find("graph_id");
        if (it == body.end() || !it->is_string()) throw ServiceError(Errc::BadRequest, "missing string field 'graph_id'");
        send_json(res, 201, svc.create_session(it->get<std::string>()));
    }));

    srv.Get(R"(/sessions/([^/]+))", guarded([&svc](const Req& req, Res& res) {
        send_json(res, 200, svc.get_session(req.matches[1]));
    }));

    srv.Post(R"(/sessions/([^/]+)/transactions)", guarded([&svc](const Req& req, Res& res) {
        Transaction txn;
        try {
            txn = transaction_from_json(detail::body_object(req));
        } catch (const std::invalid_argument& e) {
            throw ServiceError(Errc::BadRequest, e.what());
        }
        send_json(res, 200, svc.post_transaction(req.matches[1], std::move(txn)));
    }));

    srv.Post(R"(/sessions/([^/]+)/hint)", guarded([&svc](const Req& req, Res& res) {
        send_json(res, 200, to_json(svc.get_hint(req.matches[1])));
    }));

    srv.Post(R"(/sessions/([^/]+)/files)", guarded([&svc](const Req& req, Res& res) {
        std::string name, bytes;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) throw ServiceError(Errc::BadRequest, "multipart upload needs a 'file' part");
            auto part = req.get_file_value("file");
            name = part.filename;
            bytes = part.content;
        } else {
            auto q = detail::query(req, "name");
            if (!q) throw ServiceError(Errc::BadRequest, "missing 'name' query parameter");
            name = *q;
            bytes = req.body;
        }
        auto f = svc.upload_file(req.matches[1], name, bytes);
        send_json(res, 201, {{"name", f.name}, {"path", f.path}});
    }));

    srv.Post(R"(/sessions/([^/]+)/process)", guarded([&svc](const Req& req, Res& res) {
        json body = detail::body_object(req);
        std::optional<std::int64_t> gap;
        if (auto it = body.find("gap_threshold"); it != body.end() && !it->is_null()) {
            if (!it->is_number_integer()) throw ServiceError(Errc::BadRequest, "gap_threshold must be an integer");
            gap = it->get<std::int64_t>();
        }
        std::string rid = svc.process_files(req.matches[1], gap);
        send_json(res, 201, {{"result_id", rid}});
    }));

    srv.Get(R"(/results/([^/]+))", guarded([&svc](const Req& req, Res& res) {
        bool records = detail::query(req, "format").value_or("txt") == "tsv";
        std::string id = req.matches[1];
        res.set_content(svc.get_result(id, records), records ? "text/tab-separated-values" : "text/plain; charset=utf-8");
        res.set_header("Content-Disposition",
                       "attachment; filename=\"gene-adjacency-" + id + (records ? ".tsv" : ".txt") + "\"");
    }));

    srv.Get(R"(/sessions/([^/]+)/skills)", guarded([&svc](const Req& req, Res& res) {
        SkillMastery m = svc.get_skills(req.matches[1]);
        if (detail::query(req, "format").value_or("tsv") == "json") send_json(res, 200, {{"skills", to_json(m)}});
        else res.set_content(format_mastery(m), "text/tab-separated-values");
    }));

    if (!svc.config().static_dir.empty()) srv.set_mount_point("/", svc.config().static_dir.string());
}

}  // namespace gatutor::service
