#include "kale/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "kale/errors.hpp"

namespace kale {

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const auto part = path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
        if (part.empty()) throw SchemaError("malformed config key '" + std::string(path) + "'");
        parts.push_back(part);
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

const char* kind_name(const ConfigValue& v) {
    switch (v.index()) {
        case 0: return "integer";
        case 1: return "real";
        case 2: return "boolean";
        case 3: return "string";
        default: return "list";
    }
}

std::string at_line(int line) { return line > 0 ? " (line " + std::to_string(line) + ")" : ""; }

std::optional<std::int64_t> parse_int(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    std::int64_t v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

/// Converts scalar text to the type of `like`. `quoted` scalars only fit strings.
ConfigScalar coerce_scalar(const ConfigScalar& like, std::string_view text, bool quoted, const std::string& path,
                           int line) {
    auto mismatch = [&](const char* want) {
        return ConfigTypeError("type mismatch for '" + path + "': expected " + want + ", got '" + std::string(text) +
                               "'" + at_line(line));
    };
    switch (like.index()) {
        case 0: {
            if (quoted) throw mismatch("integer");
            if (auto v = parse_int(text)) return *v;
            throw mismatch("integer");
        }
        case 1: {
            if (quoted) throw mismatch("real");
            if (auto v = parse_real(text)) return *v;
            throw mismatch("real");
        }
        case 2: {
            if (!quoted && text == "true") return true;
            if (!quoted && text == "false") return false;
            throw mismatch("boolean (true/false)");
        }
        default: return std::string(text);
    }
}

/// Scalar type of a list element when the default list is empty.
ConfigScalar natural_scalar(std::string_view text, bool quoted) {
    if (!quoted) {
        if (auto v = parse_int(text)) return *v;
        if (auto v = parse_real(text)) return *v;
        if (text == "true") return true;
        if (text == "false") return false;
    }
    return std::string(text);
}

ConfigValue coerce_yaml(const ConfigValue& like, const YAML::Node& node, const std::string& path) {
    const int line = node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    if (std::holds_alternative<ConfigList>(like)) {
        if (!node.IsSequence()) {
            throw ConfigTypeError("type mismatch for '" + path + "': expected list" + at_line(line));
        }
        const auto& default_list = std::get<ConfigList>(like);
        ConfigList out;
        for (const auto& item : node) {
            if (!item.IsScalar()) {
                throw ConfigTypeError("list '" + path + "' may only hold scalars" + at_line(line));
            }
            const bool quoted = item.Tag() == "!";
            if (default_list.empty()) {
                out.push_back(natural_scalar(item.Scalar(), quoted));
            } else {
                out.push_back(coerce_scalar(default_list.front(), item.Scalar(), quoted, path, line));
            }
        }
        return ConfigValue(std::move(out));
    }
    if (!node.IsScalar()) {
        throw ConfigTypeError("type mismatch for '" + path + "': expected " + kind_name(like) + at_line(line));
    }
    const ConfigScalar like_scalar = std::visit(
        [](auto&& v) -> ConfigScalar {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConfigList>) {
                return std::string{};
            } else {
                return v;
            }
        },
        like);
    const auto s = coerce_scalar(like_scalar, node.Scalar(), node.Tag() == "!", path, line);
    return std::visit([](auto&& v) -> ConfigValue { return v; }, s);
}

ConfigValue coerce_override(const ConfigValue& like, const std::string& text, const std::string& path) {
    if (std::holds_alternative<ConfigList>(like)) {
        YAML::Node node;
        try {
            node = YAML::Load(text);
        } catch (const YAML::Exception& e) {
            throw ConfigTypeError("cannot parse list override for '" + path + "': " + e.msg);
        }
        return coerce_yaml(like, node, path);
    }
    if (std::holds_alternative<std::string>(like)) return text;
    const ConfigScalar like_scalar = std::visit(
        [](auto&& v) -> ConfigScalar {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConfigList>) {
                return std::string{};
            } else {
                return v;
            }
        },
        like);
    const auto s = coerce_scalar(like_scalar, text, false, path, 0);
    return std::visit([](auto&& v) -> ConfigValue { return v; }, s);
}

void merge_yaml(Config::Node& target, const YAML::Node& overlay, const std::string& prefix) {
    for (const auto& kv : overlay) {
        const auto key = kv.first.as<std::string>();
        const auto path = prefix.empty() ? key : prefix + "." + key;
        const int line = kv.first.Mark().line + 1;
        auto it = target.children.find(key);
        if (it == target.children.end()) {
            throw SchemaError("unknown config key '" + path + "'" + at_line(line));
        }
        auto& node = it->second;
        if (node.leaf) {
            node.leaf = coerce_yaml(*node.leaf, kv.second, path);
        } else {
            if (!kv.second.IsMap()) {
                throw ConfigTypeError("type mismatch for '" + path + "': expected a mapping" + at_line(line));
            }
            merge_yaml(node, kv.second, path);
        }
    }
}

void write_scalar(std::ostream& os, const ConfigScalar& s) {
    std::visit(
        [&](auto&& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::int64_t>) {
                os << v;
            } else if constexpr (std::is_same_v<T, double>) {
                char buf[64];
                const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
                std::string text(buf, ptr);
                if (text.find_first_of(".en") == std::string::npos) text += ".0";
                os << text;
            } else if constexpr (std::is_same_v<T, bool>) {
                os << (v ? "true" : "false");
            } else {
                os << '"';
                for (char c : v) {
                    switch (c) {
                        case '"': os << "\\\""; break;
                        case '\\': os << "\\\\"; break;
                        case '\n': os << "\\n"; break;
                        case '\t': os << "\\t"; break;
                        case '\r': os << "\\r"; break;
                        default:
                            if (static_cast<unsigned char>(c) < 0x20) {
                                static constexpr char hex[] = "0123456789abcdef";
                                os << "\\x" << hex[(c >> 4) & 0xF] << hex[c & 0xF];
                            } else {
                                os << c;
                            }
                    }
                }
                os << '"';
            }
        },
        s);
}

void dump_node(std::ostream& os, const Config::Node& node, int indent) {
    for (const auto& [key, child] : node.children) {
        os << std::string(static_cast<std::size_t>(indent), ' ') << key << ':';
        if (child.leaf) {
            os << ' ' << format_config_value(*child.leaf) << '\n';
        } else {
            os << '\n';
            dump_node(os, child, indent + 2);
        }
    }
}

void collect_paths(const Config::Node& node, const std::string& prefix, std::vector<std::string>& out) {
    for (const auto& [key, child] : node.children) {
        const auto path = prefix.empty() ? key : prefix + "." + key;
        if (child.leaf) {
            out.push_back(path);
        } else {
            collect_paths(child, path, out);
        }
    }
}

}  // namespace

void Config::set(std::string_view path, ConfigValue value) {
    if (frozen_) throw FrozenError("config is frozen; cannot set '" + std::string(path) + "'");
    if (const auto* list = std::get_if<ConfigList>(&value)) {
        for (const auto& item : *list)
            if (item.index() != list->front().index()) {
                throw ConfigTypeError("list '" + std::string(path) + "' mixes element types");
            }
    }
    Node* node = &root_;
    const auto parts = split_path(path);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (node->leaf) throw SchemaError("config path '" + std::string(path) + "' passes through a leaf");
        node = &node->children[std::string(parts[i])];
    }
    if (!node->children.empty()) throw SchemaError("config path '" + std::string(path) + "' names a subtree");
    node->leaf = std::move(value);
}

const Config::Node* Config::find(std::string_view path) const {
    const Node* node = &root_;
    for (const auto part : split_path(path)) {
        auto it = node->children.find(part);
        if (it == node->children.end()) return nullptr;
        node = &it->second;
    }
    return node;
}

bool Config::contains(std::string_view path) const { return find(path) != nullptr; }

bool Config::is_leaf(std::string_view path) const {
    const auto* n = find(path);
    return n && n->leaf.has_value();
}

const ConfigValue& Config::get(std::string_view path) const {
    const auto* n = find(path);
    if (!n || !n->leaf) throw SchemaError("unknown config key '" + std::string(path) + "'");
    return *n->leaf;
}

std::int64_t Config::get_int(std::string_view path) const {
    const auto& v = get(path);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw ConfigTypeError("'" + std::string(path) + "' is a " + kind_name(v) + ", not an integer");
}

double Config::get_real(std::string_view path) const {
    const auto& v = get(path);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigTypeError("'" + std::string(path) + "' is a " + kind_name(v) + ", not a real");
}

bool Config::get_bool(std::string_view path) const {
    const auto& v = get(path);
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ConfigTypeError("'" + std::string(path) + "' is a " + kind_name(v) + ", not a boolean");
}

const std::string& Config::get_string(std::string_view path) const {
    const auto& v = get(path);
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigTypeError("'" + std::string(path) + "' is a " + kind_name(v) + ", not a string");
}

std::vector<std::int64_t> Config::get_int_list(std::string_view path) const {
    const auto& v = get(path);
    const auto* list = std::get_if<ConfigList>(&v);
    if (!list) throw ConfigTypeError("'" + std::string(path) + "' is not a list");
    std::vector<std::int64_t> out;
    for (const auto& item : *list) {
        const auto* i = std::get_if<std::int64_t>(&item);
        if (!i) throw ConfigTypeError("'" + std::string(path) + "' is not an integer list");
        out.push_back(*i);
    }
    return out;
}

std::vector<double> Config::get_real_list(std::string_view path) const {
    const auto& v = get(path);
    const auto* list = std::get_if<ConfigList>(&v);
    if (!list) throw ConfigTypeError("'" + std::string(path) + "' is not a list");
    std::vector<double> out;
    for (const auto& item : *list) {
        if (const auto* d = std::get_if<double>(&item)) {
            out.push_back(*d);
        } else if (const auto* i = std::get_if<std::int64_t>(&item)) {
            out.push_back(static_cast<double>(*i));
        } else {
            throw ConfigTypeError("'" + std::string(path) + "' is not a numeric list");
        }
    }
    return out;
}

std::vector<std::string> Config::leaf_paths() const {
    std::vector<std::string> out;
    collect_paths(root_, "", out);
    return out;
}

Config resolve_config(const Config& defaults, std::optional<std::string_view> overlay_yaml,
                      std::span<const Override> overrides) {
    Config merged;
    Config::Node root = defaults.root();

    if (overlay_yaml) {
        YAML::Node doc;
        try {
            doc = YAML::Load(std::string(*overlay_yaml));
        } catch (const YAML::ParserException& e) {
            const int line = e.mark.line >= 0 ? e.mark.line + 1 : 0;
            throw ParseError("malformed YAML" + at_line(line) + ": " + e.msg, line);
        }
        if (doc.IsDefined() && !doc.IsNull()) {
            if (!doc.IsMap()) {
                const int line = doc.Mark().line + 1;
                throw ParseError("config overlay must be a mapping" + at_line(line), line);
            }
            merge_yaml(root, doc, "");
        }
    }

    for (const auto& [key, text] : overrides) {
        Config::Node* node = &root;
        for (const auto part : split_path(key)) {
            auto it = node->children.find(part);
            if (it == node->children.end()) throw SchemaError("unknown config key '" + key + "'");
            node = &it->second;
        }
        if (!node->leaf) throw SchemaError("config key '" + key + "' names a subtree, not a value");
        node->leaf = coerce_override(*node->leaf, text, key);
    }

    // Rebuild through set() so the structural checks apply uniformly.
    std::vector<std::pair<std::string, const ConfigValue*>> leaves;
    auto walk = [&](auto&& self, const Config::Node& n, const std::string& prefix) -> void {
        for (const auto& [k, child] : n.children) {
            const auto path = prefix.empty() ? k : prefix + "." + k;
            if (child.leaf) {
                leaves.emplace_back(path, &*child.leaf);
            } else {
                self(self, child, path);
            }
        }
    };
    walk(walk, root, "");
    for (const auto& [path, value] : leaves) merged.set(path, *value);
    merged.freeze();
    return merged;
}

std::string format_config_value(const ConfigValue& v) {
    std::ostringstream os;
    if (const auto* list = std::get_if<ConfigList>(&v)) {
        os << '[';
        for (std::size_t i = 0; i < list->size(); ++i) {
            if (i) os << ", ";
            write_scalar(os, (*list)[i]);
        }
        os << ']';
    } else {
        std::visit(
            [&](auto&& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (!std::is_same_v<T, ConfigList>) write_scalar(os, x);
            },
            v);
    }
    return os.str();
}

std::string dump_config(const Config& cfg) {
    std::ostringstream os;
    dump_node(os, cfg.root(), 0);
    return os.str();
}

}  // namespace kale
