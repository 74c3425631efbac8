#pragma once

// Session service: interactive query sessions (twenty questions against a
// prebuilt MIGC tree) and assisted battleship games. `Service` is transport
// free and returns {status, json}; `register_routes` binds it to httplib.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <variant>

#include "httplib.h"
#include "json.hpp"

#include "migc/coders.hpp"
#include "migc/error.hpp"
#include "migc/io.hpp"
#include "migc/scenarios/battleship.hpp"

namespace migc {

struct Response {
  int status = 200;
  Json body;
};

inline int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::ContradictoryAnswer:
    case ErrorCode::Solved: return 409;
    case ErrorCode::SessionComplete: return 410;
    case ErrorCode::InfeasibleQuerySet:
    case ErrorCode::ImpossibleFleet:
    case ErrorCode::TooLarge:
    case ErrorCode::BudgetExceeded: return 422;
    default: return 400;
  }
}

inline Response error_response(const Error& e) {
  return {http_status(e.code()), {{"code", std::string(e.code_name())}, {"message", e.what()}}};
}

enum class BattleshipMode { advisor, oracle };

struct ServiceOptions {
  std::chrono::seconds idle_ttl{3600};
  SearchBudget budget{};
  std::size_t max_layouts = 2'000'000;
  std::size_t max_symbols = 4096;
  /// Seeds the session-id generator; random when unset.
  std::optional<std::uint64_t> id_seed;
  /// Clock override for expiry tests.
  std::function<std::chrono::steady_clock::time_point()> clock;
};

class Service {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Service(ServiceOptions options = {}) : options_(std::move(options)) {
    if (!options_.clock) options_.clock = [] { return Clock::now(); };
    ids_.seed(options_.id_seed ? *options_.id_seed : std::random_device{}());
  }

  // ---- query sessions -----------------------------------------------------

  /// {dist, qset} -> {id, query | result}
  Response create_session(const Json& body) {
    return guarded([&] {
      const Json& dist_json = detail::require(body, "dist", "request");
      const Json& qset_json = detail::require(body, "qset", "request");
      Distribution dist = distribution_from_json(dist_json);
      if (dist.size() > options_.max_symbols) {
        throw Error(ErrorCode::TooLarge, "at most " + std::to_string(options_.max_symbols) + " symbols");
      }
      QuerySet qset = query_set_from_json(qset_json, dist.size());
      DecisionTree tree = migc_build(dist, qset, options_.budget);
      auto session = std::make_shared<QuerySession>(std::move(dist), std::move(qset), std::move(tree));
      const std::string id = insert(session);
      Json out = query_payload(*session);
      out["id"] = id;
      return Response{201, out};
    });
  }

  /// {answer} -> {query | result}
  Response post_answer(const std::string& id, const Json& body) {
    return guarded([&] {
      auto session = find<QuerySession>(id);
      std::lock_guard lock(session->mutex);
      const Json& a = detail::require(body, "answer", "request");
      if (!a.is_number_integer()) throw Error(ErrorCode::InvalidAnswer, "\"answer\" must be an integer");
      const TreeNode& node = session->tree.node(session->node);
      if (node.is_leaf()) throw Error(ErrorCode::SessionComplete, "session already identified its symbol");
      const std::int64_t answer = a.get<std::int64_t>();
      if (answer < 0 || static_cast<std::size_t>(answer) >= session->qset.arity()) {
        throw Error(ErrorCode::InvalidAnswer, "answer must lie in 0.." + std::to_string(session->qset.arity() - 1));
      }
      const auto next = session->tree.child(session->node, static_cast<std::size_t>(answer));
      if (!next) {
        throw Error(ErrorCode::ContradictoryAnswer,
                    "answer " + std::to_string(answer) + " leaves no remaining candidate");
      }
      session->history.push_back({node.query_id, static_cast<std::size_t>(answer)});
      session->node = *next;
      return Response{200, query_payload(*session)};
    });
  }

  Response get_session(const std::string& id) {
    return guarded([&] {
      auto session = find<QuerySession>(id);
      std::lock_guard lock(session->mutex);
      Json out = query_payload(*session);
      out["id"] = id;
      out["d"] = session->qset.arity();
      out["dist"] = distribution_to_json(session->dist);
      out["qset"] = query_set_to_json(session->qset);
      out["tree"] = tree_to_json(session->tree);
      out["report"] = report_to_json(expected_length(session->tree, session->dist), session->dist);
      Json history = Json::array();
      for (const auto& step : session->history) {
        history.push_back({{"query_id", step.query_id ? Json(*step.query_id) : Json(nullptr)}, {"answer", step.answer}});
      }
      out["history"] = history;
      return Response{200, out};
    });
  }

  // ---- battleship ---------------------------------------------------------

  /// {config, mode, target?} -> {id, board}
  Response create_battleship(const Json& body) {
    return guarded([&] {
      const BattleshipConfig config =
          battleship_config_from_json(body.is_object() && body.contains("config") ? body.at("config") : Json());
      if (config.layout_count > options_.max_layouts) {
        throw Error(ErrorCode::TooLarge, "at most " + std::to_string(options_.max_layouts) + " layouts");
      }
      BattleshipMode mode = BattleshipMode::advisor;
      if (body.is_object() && body.contains("mode")) {
        const Json& m = body.at("mode");
        if (m == "oracle") {
          mode = BattleshipMode::oracle;
        } else if (m != "advisor") {
          throw Error(ErrorCode::InvalidArgument, "mode must be \"advisor\" or \"oracle\"");
        }
      }
      auto game = std::make_shared<BattleshipGame>(config, mode, battleship_layouts(config));
      game->layouts.has_duplicate_boards();
      game->state = initial_state(game->layouts);
      if (mode == BattleshipMode::oracle) {
        game->target = body.contains("target")
                           ? detail::as_index(body.at("target"), "\"target\"")
                           : battleship_target(config.seed, 0, game->layouts.size());
        if (*game->target >= game->layouts.size()) throw Error(ErrorCode::InvalidArgument, "target out of range");
      }
      const std::string id = insert(game);
      return Response{201, {{"id", id}, {"board", board_payload(*game)}}};
    });
  }

  Response battleship_recommendation(const std::string& id) {
    return guarded([&] {
      auto game = find<BattleshipGame>(id);
      std::lock_guard lock(game->mutex);
      const ShotRecommendation rec = battleship_next_shot(game->state, game->layouts);
      return Response{200,
                      {{"cell", cell_json(rec.cell)},
                       {"probabilities", rec.probabilities},
                       {"entropy", rec.entropy},
                       {"survivors", game->state.survivors.size()}}};
    });
  }

  /// {cell: {row, col}, answer?}; oracle games compute the answer themselves.
  Response battleship_result(const std::string& id, const Json& body) {
    return guarded([&] {
      auto game = find<BattleshipGame>(id);
      std::lock_guard lock(game->mutex);
      const Json& c = detail::require(body, "cell", "request");
      const Cell cell{detail::as_index(detail::require(c, "row", "cell"), "\"row\""),
                      detail::as_index(detail::require(c, "col", "cell"), "\"col\"")};
      const std::size_t index = game->layouts.cell_index(cell);
      std::size_t answer = 0;
      if (game->mode == BattleshipMode::oracle) {
        answer = game->layouts.answer(*game->target, index);
        if (body.contains("answer") && !body.at("answer").is_null() &&
            detail::as_index(body.at("answer"), "\"answer\"") != answer) {
          throw Error(ErrorCode::ContradictoryAnswer, "reported answer disagrees with the hidden board");
        }
      } else {
        const Json& a = detail::require(body, "answer", "request");
        if (!a.is_number_integer()) throw Error(ErrorCode::InvalidAnswer, "\"answer\" must be an integer");
        if (a.get<std::int64_t>() < 0) throw Error(ErrorCode::InvalidAnswer, "\"answer\" must be non-negative");
        answer = a.get<std::size_t>();
      }
      apply_shot(game->state, game->layouts, cell, answer);
      Json out = board_payload(*game);
      out["shot"] = {{"cell", cell_json(cell)}, {"answer", answer}};
      return Response{200, out};
    });
  }

  Response battleship_heatmap(const std::string& id) {
    return guarded([&] {
      auto game = find<BattleshipGame>(id);
      std::lock_guard lock(game->mutex);
      const auto probs = heatmap(game->state, game->layouts);
      const std::size_t k = game->layouts.answer_count();
      Json grid = Json::array();
      for (std::size_t r = 0; r < game->layouts.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < game->layouts.cols(); ++c) {
          const std::size_t base = (r * game->layouts.cols() + c) * k;
          row.push_back(std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(base),
                                            probs.begin() + static_cast<std::ptrdiff_t>(base + k)));
        }
        grid.push_back(std::move(row));
      }
      Json channels = Json::array();
      for (std::size_t p = 0; p < game->layouts.players(); ++p) channels.push_back("P" + std::to_string(p + 1));
      channels.push_back("empty");
      return Response{200,
                      {{"rows", game->layouts.rows()},
                       {"cols", game->layouts.cols()},
                       {"channels", channels},
                       {"cells", grid},
                       {"entropy", game->state.entropy_trace.back()}}};
    });
  }

  Response get_battleship(const std::string& id) {
    return guarded([&] {
      auto game = find<BattleshipGame>(id);
      std::lock_guard lock(game->mutex);
      Json out = board_payload(*game);
      out["id"] = id;
      Json shots = Json::array();
      for (const Shot& s : game->state.shots) shots.push_back({{"cell", cell_json(s.cell)}, {"answer", s.answer}});
      out["shots"] = shots;
      return Response{200, out};
    });
  }

  /// Dispatches "METHOD /path" with a raw body; used by the HTTP layer.
  Response handle(std::string_view method, std::string_view path, std::string_view body_text) {
    Json body;
    if (!body_text.empty()) {
      try {
        body = parse_json(body_text);
      } catch (const Error& e) {
        return error_response(e);
      }
    }
    std::vector<std::string> parts;
    for (std::size_t pos = 0; pos < path.size();) {
      const std::size_t next = std::min(path.find('/', pos), path.size());
      if (next > pos) parts.emplace_back(path.substr(pos, next - pos));
      pos = next + 1;
    }
    const bool get = method == "GET";
    const bool post = method == "POST";
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1 && post) return create_session(body);
      if (parts.size() == 2 && get) return get_session(parts[1]);
      if (parts.size() == 3 && post && parts[2] == "answer") return post_answer(parts[1], body);
    }
    if (!parts.empty() && parts[0] == "battleship") {
      if (parts.size() == 1 && post) return create_battleship(body);
      if (parts.size() == 2 && get) return get_battleship(parts[1]);
      if (parts.size() == 3 && get && parts[2] == "recommendation") return battleship_recommendation(parts[1]);
      if (parts.size() == 3 && get && parts[2] == "heatmap") return battleship_heatmap(parts[1]);
      if (parts.size() == 3 && post && parts[2] == "result") return battleship_result(parts[1], body);
    }
    return {404, {{"code", "NotFound"}, {"message", "no route for " + std::string(method) + " " + std::string(path)}}};
  }

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t expire_idle() {
    const auto now = options_.clock();
    std::unique_lock lock(store_mutex_);
    std::size_t removed = 0;
    for (auto it = store_.begin(); it != store_.end();) {
      if (now - it->second.last_used > options_.idle_ttl) {
        it = store_.erase(it);
        ++removed;
      } else {
        ++it;
      }
    }
    return removed;
  }

  std::size_t session_count() const {
    std::shared_lock lock(store_mutex_);
    return store_.size();
  }

 private:
  struct QuerySession {
    struct Step {
      std::optional<std::size_t> query_id;
      std::size_t answer;
    };
    QuerySession(Distribution d, QuerySet q, DecisionTree t)
        : dist(std::move(d)), qset(std::move(q)), tree(std::move(t)), node(tree.root()) {}
    Distribution dist;
    QuerySet qset;
    DecisionTree tree;
    NodeId node;
    std::vector<Step> history;
    std::mutex mutex;
  };

  struct BattleshipGame {
    BattleshipGame(BattleshipConfig c, BattleshipMode m, LayoutSet l)
        : config(std::move(c)), mode(m), layouts(std::move(l)) {}
    BattleshipConfig config;
    BattleshipMode mode;
    LayoutSet layouts;
    BattleshipState state;
    std::optional<std::size_t> target;
    std::mutex mutex;
  };

  struct Entry {
    std::variant<std::shared_ptr<QuerySession>, std::shared_ptr<BattleshipGame>> session;
    Clock::time_point last_used;
  };

  template <typename F>
  Response guarded(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return error_response(e);
    } catch (const Json::exception& e) {
      return error_response(Error(ErrorCode::ParseError, e.what()));
    }
  }

  template <typename T>
  std::string insert(std::shared_ptr<T> session) {
    expire_idle();
    std::unique_lock lock(store_mutex_);
    std::string id;
    do {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(ids_()));
      id = buf;
    } while (store_.contains(id));
    store_.emplace(id, Entry{std::move(session), options_.clock()});
    return id;
  }

  template <typename T>
  std::shared_ptr<T> find(const std::string& id) {
    {
      std::unique_lock lock(store_mutex_);
      const auto it = store_.find(id);
      if (it != store_.end()) {
        const auto now = options_.clock();
        if (now - it->second.last_used <= options_.idle_ttl) {
          if (auto* s = std::get_if<std::shared_ptr<T>>(&it->second.session)) {
            it->second.last_used = now;
            return *s;
          }
        } else {
          store_.erase(it);
        }
      }
    }
    throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
  }

  static Json cell_json(Cell c) { return {{"row", c.row}, {"col", c.col}}; }

  /// The pending query with labeled options, or the identified symbol.
  static Json query_payload(const QuerySession& s) {
    const TreeNode& node = s.tree.node(s.node);
    Json out;
    out["questions"] = s.history.size();
    Json candidates = Json::array();
    for (SymbolIndex i : s.tree.leaves_under(s.node)) candidates.push_back(s.dist.label(i));
    out["candidates"] = candidates;
    if (node.is_leaf()) {
      out["terminal"] = true;
      out["result"] = {{"symbol", *node.symbol}, {"label", s.dist.label(*node.symbol)}, {"questions", s.history.size()}};
      return out;
    }
    out["terminal"] = false;
    Json options = Json::array();
    for (const auto& [answer, child] : node.children) {
      Json labels = Json::array();
      for (SymbolIndex i : s.tree.leaves_under(child)) labels.push_back(s.dist.label(i));
      options.push_back({{"answer", answer}, {"labels", labels}});
    }
    Json query;
    query["query_id"] = node.query_id ? Json(*node.query_id) : Json(nullptr);
    query["options"] = options;
    out["query"] = query;
    return out;
  }

  static Json board_payload(const BattleshipGame& g) {
    return {{"rows", g.layouts.rows()},
            {"cols", g.layouts.cols()},
            {"players", g.layouts.players()},
            {"layout_count", g.layouts.size()},
            {"mode", g.mode == BattleshipMode::oracle ? "oracle" : "advisor"},
            {"config", battleship_config_to_json(g.config)},
            {"survivors", g.state.survivors.size()},
            {"entropy", g.state.entropy_trace.back()},
            {"entropy_trace", g.state.entropy_trace},
            {"tries", g.state.shots.size()},
            {"solved", is_identified(g.state, g.layouts)}};
  }

  ServiceOptions options_;
  mutable std::shared_mutex store_mutex_;
  std::unordered_map<std::string, Entry> store_;
  std::mt19937_64 ids_;
};

/// Binds every endpoint on `server`, with permissive CORS for browser clients.
inline void register_routes(httplib::Server& server, Service& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post(R"(/sessions)", forward);
  server.Get(R"(/sessions/[^/]+)", forward);
  server.Post(R"(/sessions/[^/]+/answer)", forward);
  server.Post(R"(/battleship)", forward);
  server.Get(R"(/battleship/[^/]+)", forward);
  server.Get(R"(/battleship/[^/]+/(recommendation|heatmap))", forward);
  server.Post(R"(/battleship/[^/]+/result)", forward);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const Json body{{"code", res.status == 404 ? "NotFound" : "HttpError"},
                    {"message", "no route for " + req.method + " " + req.path}};
    res.set_content(body.dump(), "application/json");
  });
}

}  // namespace migc
