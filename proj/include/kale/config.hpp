#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace kale {

using ConfigScalar = std::variant<std::int64_t, double, bool, std::string>;
using ConfigList = std::vector<ConfigScalar>;
/// A leaf value. Lists hold scalars only.
using ConfigValue = std::variant<std::int64_t, double, bool, std::string, ConfigList>;

using Override = std::pair<std::string, std::string>;

/// Hierarchical key-value tree addressed by case-sensitive dotted paths
/// ("SOLVER.BASE_LR"). Frozen configs reject every mutation.
class Config {
public:
    /// Sets a leaf, creating intermediate subtrees. A path may not pass
    /// through an existing leaf nor replace an existing subtree.
    void set(std::string_view path, ConfigValue value);

    bool contains(std::string_view path) const;
    bool is_leaf(std::string_view path) const;

    /// Throws SchemaError for an unknown path.
    const ConfigValue& get(std::string_view path) const;
    std::int64_t get_int(std::string_view path) const;
    /// Accepts integer leaves as well.
    double get_real(std::string_view path) const;
    bool get_bool(std::string_view path) const;
    const std::string& get_string(std::string_view path) const;
    std::vector<std::int64_t> get_int_list(std::string_view path) const;
    std::vector<double> get_real_list(std::string_view path) const;

    /// Every leaf path, sorted.
    std::vector<std::string> leaf_paths() const;

    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    friend bool operator==(const Config& a, const Config& b) { return a.root_ == b.root_; }

    struct Node {
        std::optional<ConfigValue> leaf;
        std::map<std::string, Node, std::less<>> children;
        friend bool operator==(const Node&, const Node&) = default;
    };
    const Node& root() const noexcept { return root_; }

private:
    const Node* find(std::string_view path) const;

    Node root_;
    bool frozen_ = false;
};

/// Defaults, then the YAML overlay, then the dotted-key overrides (last one
/// wins). The result is frozen and has exactly the leaf set of `defaults`.
///
/// Errors: SchemaError for a path absent from defaults, ConfigTypeError when a
/// value does not fit the default's type (integers widen to reals, reals never
/// narrow to integers, booleans are exactly "true"/"false"), ParseError with a
/// 1-based line number for malformed YAML.
Config resolve_config(const Config& defaults, std::optional<std::string_view> overlay_yaml,
                      std::span<const Override> overrides = {});

/// Canonical YAML: two-space indentation, keys sorted within each subtree,
/// reals in shortest round-trip form, strings double-quoted, lists in flow
/// style. resolve_config(defaults, dump_config(c)) == c.
std::string dump_config(const Config& cfg);

/// Text form of a single leaf as dump_config writes it.
std::string format_config_value(const ConfigValue& v);

}  // namespace kale
