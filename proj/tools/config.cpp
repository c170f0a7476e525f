#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "tvart/error.hpp"

namespace tvart::cli {
namespace {

// Options that only steer where or how the tool runs, never what it writes.
const std::set<std::string> kNotInManifest = {"help", "config", "out", "verbose", "jobs"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void set_value(KeyValues& kv, std::string key, std::string value) {
    auto it = std::find_if(kv.begin(), kv.end(), [&](const auto& p) { return p.first == key; });
    if (it == kv.end())
        kv.emplace_back(std::move(key), std::move(value));
    else
        it->second = std::move(value);
}

} // namespace

KeyValues parse_config(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::Parse, fmt::format("{}:{}: expected key=value", source, line_no));
        const auto key = trim(text.substr(0, eq));
        if (key.empty())
            throw Error(ErrorKind::Parse, fmt::format("{}:{}: empty key", source, line_no));
        set_value(kv, std::string(key), std::string(trim(text.substr(eq + 1))));
    }
    return kv;
}

KeyValues read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, fmt::format("cannot open config file {}", path.string()));
    return parse_config(in, path.string());
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
    if (args.size() < 2)
        return args;
    const CLI::App* sub = nullptr;
    std::size_t sub_pos = 0;
    for (std::size_t i = 1; i < args.size() && !sub; ++i)
        for (const auto* candidate : app.get_subcommands({}))
            if (candidate->get_name() == args[i]) {
                sub = candidate;
                sub_pos = i;
                break;
            }
    if (!sub)
        return args;

    std::optional<std::string> path;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (!path)
        return args;

    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(*path)) {
        if (key == "config" || key == "help" || !sub->get_option_no_throw("--" + key))
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("{}: unknown key '{}' for command '{}'", *path, key, sub->get_name()));
        injected.push_back(fmt::format("--{}={}", key, value));
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, args.end());
    return out;
}

KeyValues effective_options(const CLI::App& sub) {
    KeyValues kv;
    for (const auto* opt : sub.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || kNotInManifest.count(names.front()))
            continue;
        std::string value;
        if (opt->get_expected_min() == 0)
            value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
        else if (opt->count() > 0)
            value = opt->as<std::string>();
        else
            value = opt->get_default_str();
        if (!value.empty())
            kv.emplace_back(names.front(), value);
    }
    return kv;
}

std::string manifest_line(std::string_view command, const KeyValues& options) {
    std::string line = fmt::format("tvart {} {}", TVART_VERSION, command);
    for (const auto& [key, value] : options)
        line += fmt::format(" {}={}", key, value);
    return line;
}

void write_manifest_file(const std::filesystem::path& dir, std::string_view command,
                         const KeyValues& options) {
    std::ofstream out(dir / "manifest.txt");
    if (!out)
        throw Error(ErrorKind::Io, fmt::format("cannot write {}", (dir / "manifest.txt").string()));
    out << fmt::format("# tvart {} {}\n", TVART_VERSION, command);
    for (const auto& [key, value] : options)
        out << key << '=' << value << '\n';
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = std::min(text.find(',', start), text.size());
        const auto item = trim(text.substr(start, comma - start));
        if (!item.empty())
            out.emplace_back(item);
        start = comma + 1;
    }
    return out;
}

std::vector<long long> parse_integer_list(std::string_view text, std::string_view what) {
    std::vector<long long> out;
    for (const auto& item : split_list(text)) {
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size())
            throw Error(ErrorKind::InvalidArgument, fmt::format("{}: '{}' is not an integer", what, item));
        out.push_back(v);
    }
    if (out.empty())
        throw Error(ErrorKind::InvalidArgument, fmt::format("{}: empty list", what));
    return out;
}

} // namespace tvart::cli
