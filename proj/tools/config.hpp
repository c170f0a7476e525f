#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace CLI {
class App;
}

namespace tvart::cli {

/// Ordered key=value pairs; the order is the order of first definition.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key=value text. '#' lines and blank lines are skipped, whitespace
/// around keys and values is trimmed, a repeated key keeps its last value.
KeyValues parse_config(std::istream& in, const std::string& source);
KeyValues read_config(const std::filesystem::path& path);

/// Command line with the entries of the selected subcommand's --config file
/// spliced in ahead of the user's own flags, so the flags win. Throws
/// tvart::Error(InvalidArgument) for a key the subcommand does not define.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app);

/// Effective value of every output-affecting option of `sub`, in definition order.
KeyValues effective_options(const CLI::App& sub);

/// "tvart <version> <command> key=value ...": one line, no newline.
std::string manifest_line(std::string_view command, const KeyValues& options);

/// manifest.txt in `dir`: a comment line naming the tool and command, then
/// one key=value line per option. Loadable again with --config.
void write_manifest_file(const std::filesystem::path& dir, std::string_view command,
                         const KeyValues& options);

/// "10,100" -> {10, 100}. Throws tvart::Error(InvalidArgument) naming `what`.
std::vector<long long> parse_integer_list(std::string_view text, std::string_view what);
std::vector<std::string> split_list(std::string_view text);

} // namespace tvart::cli
