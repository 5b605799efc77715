#ifndef LATFLUX_SERVICE_HPP
#define LATFLUX_SERVICE_HPP

#include <functional>
#include <memory>
#include <string>

#include <httplib.h>

#include "additive.hpp"
#include "io.hpp"
#include "pipeline.hpp"

namespace latflux {

/// Stateless request handlers.  Each takes the raw request body and returns
/// a status code with a JSON body; the HTTP layer only moves bytes.
namespace service {

struct Response {
    int status = 200;
    Json body;
};

struct BadRequest : InputError {
    using InputError::InputError;
};

inline Response error(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

inline Json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) throw BadRequest("empty request body");
    Json j = parse_json(body, "request body");
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
}

// A context is either a JSON context object or .cxt text in a string.
inline FormalContext context_field(const Json& j) {
    if (!j.contains("context")) throw BadRequest("missing 'context'");
    const Json& c = j["context"];
    if (c.is_string()) return read_cxt_string(c.get<std::string>());
    return context_from_json(c);
}

inline RepresentationKind representation_field(const Json& j) {
    const std::string r = j.value("representation", std::string("doubly"));
    if (r == "doubly") return RepresentationKind::DoublyAdditive;
    if (r == "attribute") return RepresentationKind::AttributeAdditive;
    if (r == "object") return RepresentationKind::ObjectAdditive;
    if (r == "dual-attribute") return RepresentationKind::DualAttribute;
    throw BadRequest("unknown representation '" + r + "'");
}

inline double number_field(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw BadRequest(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

template <class F>
Response guarded(F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        return error(400, e.what());
    } catch (const std::invalid_argument& e) {
        return error(400, e.what());
    } catch (const std::out_of_range& e) {
        return error(400, e.what());
    } catch (const Json::exception& e) {
        return error(400, e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

/// Body: a context (JSON object, or {"context": ...}).
inline Response lattice(const std::string& body) {
    return guarded([&] {
        const Json j = parse_body(body);
        const FormalContext ctx = j.contains("context") ? context_field(j) : context_from_json(j);
        return Response{200, lattice_to_json(compute_lattice(ctx))};
    });
}

struct DrawRequest {
    ConceptLattice lattice;
    Algorithm algorithm = Algorithm::DimFlux;
    PipelineConfig config;
    bool stream = false;
};

inline DrawRequest parse_draw(const std::string& body) {
    const Json j = parse_body(body);
    DrawRequest r;
    const std::string algo = j.value("algo", std::string("dimflux"));
    const auto a = parse_algorithm(algo);
    if (!a) throw BadRequest("unknown algo '" + algo + "'");
    r.algorithm = *a;
    if (j.contains("config") && !j["config"].is_null()) r.config = pipeline_config_from_json(j["config"]);
    r.stream = j.value("stream", false);
    r.lattice = compute_lattice(context_field(j));
    return r;
}

inline Response run_draw(const DrawRequest& req, const ProgressCallback& progress = {}) {
    return guarded([&] {
        const PipelineResult r = run_algorithm(req.lattice, req.algorithm, req.config, progress);
        Json out = pipeline_result_to_json(req.lattice, req.algorithm, r);
        out["partial"] = r.budget_exceeded;
        out["lattice"] = lattice_to_json(req.lattice);
        return Response{200, std::move(out)};
    });
}

/// Body: {context, algo, config?}.  Returns every stage with its metrics.
inline Response draw(const std::string& body) {
    DrawRequest req;
    if (auto bad = guarded([&] {
            req = parse_draw(body);
            return Response{};
        });
        bad.status != 200)
        return bad;
    return run_draw(req);
}

/// Body: {context, layout, concept, newPosition: {x, y}, tolerance?, representation?}.
inline Response drag(const std::string& body) {
    return guarded([&] {
        const Json j = parse_body(body);
        const ConceptLattice lat = compute_lattice(context_field(j));
        if (!j.contains("layout")) throw BadRequest("missing 'layout'");
        const Layout layout = layout_from_json(j["layout"], lat);
        if (!j.contains("concept") || !j["concept"].is_number_unsigned()) throw BadRequest("'concept' must be an index");
        const std::size_t c = j["concept"].get<std::size_t>();
        if (c >= lat.size()) throw BadRequest("concept index out of range");
        if (!j.contains("newPosition") || !j["newPosition"].is_object()) throw BadRequest("missing 'newPosition'");
        const Vec2 target{number_field(j["newPosition"], "x"), number_field(j["newPosition"], "y")};
        const double tol = j.contains("tolerance") ? number_field(j, "tolerance") : 1e-6;
        const AdditiveBasis basis = build_srm(lat, representation_field(j));
        const AdditivityReport add = is_additive(basis, layout, tol);
        if (!add.additive)
            throw BadRequest("layout is not additive (max deviation " + std::to_string(add.max_deviation) + ")");
        const DragResult r = drag_step(lat, basis, layout, c, target);
        return Response{200, Json{{"layout", layout_to_json(lat, r.layout)},
                                  {"accepted", r.accepted},
                                  {"validity", validity_to_json(r.validity)}}};
    });
}

/// Body: {context, layout, gridStep, representation?}.
inline Response snap(const std::string& body) {
    return guarded([&] {
        const Json j = parse_body(body);
        const ConceptLattice lat = compute_lattice(context_field(j));
        if (!j.contains("layout")) throw BadRequest("missing 'layout'");
        const Layout layout = layout_from_json(j["layout"], lat);
        const double step = number_field(j, "gridStep");
        const AdditiveBasis basis = build_srm(lat, representation_field(j));
        const Layout snapped = snap_to_grid(basis, layout, step);
        const ValidityReport v = validate_line_diagram(lat, snapped);
        return Response{200, Json{{"layout", layout_to_json(lat, snapped)},
                                  {"valid", v.valid()},
                                  {"validity", validity_to_json(v)}}};
    });
}

} // namespace service

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 7878;
    std::string allowed_origin = "*";
};

/// HTTP front end.  Handlers share no mutable state; httplib runs them on
/// its worker pool.
class LayoutService {
public:
    explicit LayoutService(ServiceOptions opts = {}) : opts_(std::move(opts)) { routes(); }

    /// Blocks until stop().  Returns false if the socket could not be bound.
    bool listen() { return server_.listen(opts_.host, opts_.port); }

    /// Binds an ephemeral port and returns it; call listen_after_bind() next.
    int bind_any_port() { return server_.bind_to_any_port(opts_.host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }

    void stop() { server_.stop(); }
    void wait_until_ready() { server_.wait_until_ready(); }
    bool running() const { return server_.is_running(); }

private:
    static void reply(httplib::Response& res, const service::Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    }

    void routes() {
        server_.set_default_headers({{"Access-Control-Allow-Origin", opts_.allowed_origin},
                                     {"Access-Control-Allow-Methods", "POST, OPTIONS"},
                                     {"Access-Control-Allow-Headers", "Content-Type"}});
        server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server_.Post("/lattice", [](const httplib::Request& req, httplib::Response& res) {
            reply(res, service::lattice(req.body));
        });
        server_.Post("/drag", [](const httplib::Request& req, httplib::Response& res) {
            reply(res, service::drag(req.body));
        });
        server_.Post("/snap", [](const httplib::Request& req, httplib::Response& res) {
            reply(res, service::snap(req.body));
        });
        server_.Post("/draw", [](const httplib::Request& req, httplib::Response& res) {
            service::DrawRequest draw;
            const auto parsed = service::guarded([&] {
                draw = service::parse_draw(req.body);
                return service::Response{};
            });
            if (parsed.status != 200) return reply(res, parsed);
            if (!draw.stream) return reply(res, service::run_draw(draw));
            // Newline-delimited JSON: one status line per optimizer
            // iteration, then {"result": ...} with the status code inside.
            auto shared = std::make_shared<service::DrawRequest>(std::move(draw));
            res.set_chunked_content_provider("application/x-ndjson", [shared](std::size_t, httplib::DataSink& sink) {
                auto progress = [&sink, &shared](const TraceRow& row) {
                    const std::string line =
                        Json{{"iteration", row.iteration},
                             {"energy", row.energy.total(shared->config.forces)},
                             {"maxForce", row.max_force}}
                            .dump() +
                        "\n";
                    sink.write(line.data(), line.size());
                };
                const service::Response r = service::run_draw(*shared, progress);
                const std::string last = Json{{"status", r.status}, {"result", r.body}}.dump() + "\n";
                sink.write(last.data(), last.size());
                sink.done();
                return true;
            });
        });
    }

    ServiceOptions opts_;
    httplib::Server server_;
};

} // namespace latflux

#endif // LATFLUX_SERVICE_HPP
