#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "equigrid/rng.hpp"

namespace equigrid {

/// Generative model for UCT search: a simulator that can list legal actions,
/// sample one stochastic transition, and estimate a leaf value by rollout.
template <class M>
concept SearchModel = requires(const M& m, const typename M::State& s, const typename M::Action& a,
                               Rng& rng, std::size_t depth) {
    { m.legal_actions(s) } -> std::convertible_to<std::vector<typename M::Action>>;
    { m.transition(s, a, rng) } -> std::convertible_to<std::pair<typename M::State, double>>;
    { m.rollout(s, rng, depth) } -> std::convertible_to<double>;
    { m.discount() } -> std::convertible_to<double>;
};

struct UctConfig {
    std::size_t iterations = 2000;
    double exploration_constant = 1.4142135623730951;
    std::size_t max_depth = 10;
    std::size_t chance_samples = 4;
};

/// Single-tree UCT with sampled chance nodes.
///
/// Decision nodes branch on legal actions in the model's order. Each action
/// edge is a chance node holding at most `chance_samples` sampled outcomes;
/// once full, an existing outcome is picked uniformly. Selection visits
/// unvisited edges first (in order), then maximizes
///   normalized mean + c * sqrt(ln N_parent / N_edge),
/// where means are min-max normalized across siblings. The returned action is
/// the most visited root edge, ties to the earlier action.
template <SearchModel M>
class UctSearch {
public:
    using State = typename M::State;
    using Action = typename M::Action;

    struct Result {
        Action action{};
        std::vector<Action> root_actions;
        std::vector<std::size_t> root_visits;
        std::vector<double> root_means;
        std::size_t terminal_at_root = 0;  // iterations that never left the root
        std::size_t node_count = 0;
    };

    UctSearch(const M& model, UctConfig cfg) : model_(model), cfg_(cfg) {}

    Result search(const State& root, Rng& rng) {
        nodes_.clear();
        nodes_.push_back(Node{root, 0, false, {}});
        Result out;
        expand(nodes_.front());
        auto& root_node = nodes_.front();
        out.root_actions.reserve(root_node.edges.size());
        for (const auto& e : root_node.edges) out.root_actions.push_back(e.action);
        if (root_node.edges.empty()) return out;
        if (root_node.edges.size() == 1) {
            out.action = root_node.edges.front().action;
            out.root_visits.assign(1, 0);
            out.root_means.assign(1, 0.0);
            return out;
        }

        for (std::size_t it = 0; it < cfg_.iterations; ++it) {
            if (cfg_.max_depth == 0) {
                ++out.terminal_at_root;
                continue;
            }
            simulate(0, cfg_.max_depth, rng);
        }

        const auto& edges = nodes_.front().edges;
        std::size_t best = 0;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            out.root_visits.push_back(edges[k].visits);
            out.root_means.push_back(edges[k].visits ? edges[k].value_sum / edges[k].visits : 0.0);
            if (edges[k].visits > edges[best].visits) best = k;
        }
        out.action = edges[best].action;
        out.node_count = nodes_.size();
        return out;
    }

private:
    struct Outcome {
        std::size_t node;
        double reward;
    };
    struct Edge {
        Action action;
        std::size_t visits = 0;
        double value_sum = 0.0;
        std::vector<Outcome> outcomes;
    };
    struct Node {
        State state;
        std::size_t visits = 0;
        bool expanded = false;
        std::vector<Edge> edges;
    };

    void expand(Node& node) {
        if (node.expanded) return;
        node.expanded = true;
        for (auto& a : model_.legal_actions(node.state)) node.edges.push_back(Edge{std::move(a), 0, 0.0, {}});
    }

    std::size_t select(const Node& node) const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t k = 0; k < node.edges.size(); ++k) {
            const auto& e = node.edges[k];
            if (e.visits == 0) return k;
            const double mean = e.value_sum / static_cast<double>(e.visits);
            lo = std::min(lo, mean);
            hi = std::max(hi, mean);
        }
        const double span = hi - lo;
        const double log_n = std::log(static_cast<double>(node.visits));
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < node.edges.size(); ++k) {
            const auto& e = node.edges[k];
            const double n = static_cast<double>(e.visits);
            const double mean = e.value_sum / n;
            const double q = span > 0.0 ? (mean - lo) / span : 0.0;
            const double score = q + cfg_.exploration_constant * std::sqrt(log_n / n);
            if (score > best_score) {
                best_score = score;
                best = k;
            }
        }
        return best;
    }

    double simulate(std::size_t index, std::size_t depth, Rng& rng) {
        if (depth == 0) return 0.0;
        // std::deque keeps references valid across push_back.
        Node& node = nodes_[index];
        expand(node);
        if (node.edges.empty()) return 0.0;
        Edge& edge = node.edges[select(node)];
        const double gamma = model_.discount();

        double value;
        if (edge.outcomes.size() < cfg_.chance_samples) {
            auto [next, r] = model_.transition(node.state, edge.action, rng);
            nodes_.push_back(Node{std::move(next), 0, false, {}});
            const std::size_t child = nodes_.size() - 1;
            edge.outcomes.push_back(Outcome{child, r});
            value = r + gamma * model_.rollout(nodes_[child].state, rng, depth - 1);
        } else {
            const Outcome o = edge.outcomes[rng.uniform_index(edge.outcomes.size())];
            value = o.reward + gamma * simulate(o.node, depth - 1, rng);
        }
        ++edge.visits;
        edge.value_sum += value;
        ++node.visits;
        return value;
    }

    const M& model_;
    UctConfig cfg_;
    std::deque<Node> nodes_;
};

}  // namespace equigrid
