#include "pkgrid/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pkgrid
{
namespace
{
std::string_view trim(std::string_view s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos)
        return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

Real parsePlain(std::string_view text, std::string_view whole)
{
    text = trim(text);
    Real value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError("not a number: '" + std::string(whole) + "'");
    return value;
}

int parseInt(std::string_view text)
{
    text = trim(text);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ConfigError("not an integer: '" + std::string(text) + "'");
    return value;
}

bool parseBool(std::string_view text)
{
    if (text == "true" || text == "1" || text == "yes")
        return true;
    if (text == "false" || text == "0" || text == "no")
        return false;
    throw ConfigError("not a boolean: '" + std::string(text) + "'");
}

std::vector<Real> parseVector(std::string_view text)
{
    std::vector<Real> values;
    std::istringstream stream{std::string(text)};
    std::string token;
    while (stream >> token)
        values.push_back(parseNumber(token));
    if (values.empty())
        throw ConfigError("empty vector value");
    return values;
}

using Setter = std::function<void(RunConfig &, std::string_view)>;

const std::map<std::string, Setter, std::less<>> &setters()
{
    static const std::map<std::string, Setter, std::less<>> table = {
        {"geometry", [](RunConfig &c, std::string_view v) { c.geometry = v; }},
        {"lower", [](RunConfig &c, std::string_view v) { c.lower = parseVector(v); }},
        {"upper", [](RunConfig &c, std::string_view v) { c.upper = parseVector(v); }},
        {"center", [](RunConfig &c, std::string_view v) { c.center = parseVector(v); }},
        {"radius", [](RunConfig &c, std::string_view v) { c.radius = parseNumber(v); }},
        {"inner_radius", [](RunConfig &c, std::string_view v) { c.inner_radius = parseNumber(v); }},
        {"outer_radius", [](RunConfig &c, std::string_view v) { c.outer_radius = parseNumber(v); }},
        {"coarsest_spacing", [](RunConfig &c, std::string_view v) { c.coarsest_spacing = parseNumber(v); }},
        {"target_spacing", [](RunConfig &c, std::string_view v) { c.target_spacing = parseNumber(v); }},
        {"pkg_size", [](RunConfig &c, std::string_view v) { c.pkg_size = parseInt(v); }},
        {"correct", [](RunConfig &c, std::string_view v) { c.correct = parseBool(v); }},
        {"trust_band_ratio", [](RunConfig &c, std::string_view v) { c.trust_band_ratio = parseNumber(v); }},
        {"policy", [](RunConfig &c, std::string_view v) { c.policy = v; }},
        {"threads", [](RunConfig &c, std::string_view v) { c.threads = parseInt(v); }},
        {"output", [](RunConfig &c, std::string_view v) { c.output = v; }},
        {"artifact", [](RunConfig &c, std::string_view v) { c.artifact = v; }},
        {"kernel_h_ratio", [](RunConfig &c, std::string_view v) { c.kernel_h_ratio = parseNumber(v); }},
        {"clean_threshold", [](RunConfig &c, std::string_view v) { c.clean_threshold = parseNumber(v); }},
        {"reinit_steps", [](RunConfig &c, std::string_view v) { c.reinit_steps = parseInt(v); }},
        {"cfl", [](RunConfig &c, std::string_view v) { c.cfl = parseNumber(v); }},
        {"clean_max_rounds", [](RunConfig &c, std::string_view v) { c.clean_max_rounds = parseInt(v); }},
        {"particle_spacing", [](RunConfig &c, std::string_view v) { c.particle_spacing = parseNumber(v); }},
        {"relax_steps", [](RunConfig &c, std::string_view v) { c.relax_steps = parseInt(v); }},
        {"step_scale", [](RunConfig &c, std::string_view v) { c.step_scale = parseNumber(v); }},
        {"jitter", [](RunConfig &c, std::string_view v) { c.jitter = parseNumber(v); }},
        {"seed", [](RunConfig &c, std::string_view v) { c.seed = static_cast<std::uint64_t>(parseInt(v)); }},
        {"particle_format", [](RunConfig &c, std::string_view v) { c.particle_format = v; }},
        {"window_lower", [](RunConfig &c, std::string_view v) { c.window_lower = parseVector(v); }},
        {"window_upper", [](RunConfig &c, std::string_view v) { c.window_upper = parseVector(v); }},
        {"bench_resolution", [](RunConfig &c, std::string_view v) { c.bench_resolution = parseNumber(v); }},
        {"bench_runs", [](RunConfig &c, std::string_view v) { c.bench_runs = parseInt(v); }},
        {"bench_threads", [](RunConfig &c, std::string_view v) { c.bench_threads = parseInt(v); }},
    };
    return table;
}

void requirePositive(Real value, const char *name)
{
    if (!(value > 0.0))
        throw ConfigError(std::string(name) + " must be positive");
}
} // namespace
//=================================================================================================//
Real parseNumber(std::string_view text)
{
    text = trim(text);
    const auto slash = text.find('/');
    if (slash == std::string_view::npos)
        return parsePlain(text, text);
    const Real denominator = parsePlain(text.substr(slash + 1), text);
    if (denominator == 0.0)
        throw ConfigError("division by zero in '" + std::string(text) + "'");
    return parsePlain(text.substr(0, slash), text) / denominator;
}
//=================================================================================================//
int RunConfig::dimension() const { return geometry == "analytic:slab_fin" ? 2 : 3; }
//=================================================================================================//
std::filesystem::path RunConfig::geometryPath() const
{
    const std::filesystem::path path(geometry);
    return path.is_absolute() || base_directory.empty() ? path : base_directory / path;
}
//=================================================================================================//
std::vector<Real> RunConfig::lowerCorner() const
{
    return lower.value_or(std::vector<Real>(static_cast<std::size_t>(dimension()), 0.0));
}
//=================================================================================================//
std::vector<Real> RunConfig::upperCorner() const
{
    return upper.value_or(std::vector<Real>(static_cast<std::size_t>(dimension()), 1.0));
}
//=================================================================================================//
std::vector<Real> RunConfig::shapeCenter() const
{
    if (!center.empty())
        return center;
    std::vector<Real> middle = lowerCorner();
    const std::vector<Real> top = upperCorner();
    for (std::size_t k = 0; k < middle.size(); ++k)
        middle[k] = 0.5 * (middle[k] + top[k]);
    return middle;
}
//=================================================================================================//
void RunConfig::validate() const
{
    static const char *known[] = {"analytic:shell", "analytic:sphere", "analytic:slab_fin"};
    if (isAnalytic() && std::find(std::begin(known), std::end(known), geometry) == std::end(known))
        throw ConfigError("unknown analytic geometry '" + geometry + "'");
    if (geometry.empty())
        throw ConfigError("geometry is empty");
    const auto d = static_cast<std::size_t>(dimension());
    const std::vector<Real> lo = lowerCorner(), hi = upperCorner();
    if (lo.size() != d || hi.size() != d)
        throw ConfigError("lower/upper need " + std::to_string(d) + " components");
    for (std::size_t k = 0; k < d; ++k)
        if (!(hi[k] > lo[k]))
            throw ConfigError("upper must exceed lower on every axis");
    if (!center.empty() && center.size() != d)
        throw ConfigError("center needs " + std::to_string(d) + " components");
    if (window_lower.has_value() != window_upper.has_value())
        throw ConfigError("window_lower and window_upper go together");
    if (window_lower && (window_lower->size() != d || window_upper->size() != d))
        throw ConfigError("window corners need " + std::to_string(d) + " components");
    requirePositive(radius, "radius");
    requirePositive(inner_radius, "inner_radius");
    requirePositive(outer_radius, "outer_radius");
    if (!(outer_radius > inner_radius))
        throw ConfigError("outer_radius must exceed inner_radius");
    requirePositive(coarsest_spacing, "coarsest_spacing");
    requirePositive(target_spacing, "target_spacing");
    if (target_spacing > coarsest_spacing)
        throw ConfigError("target_spacing must not exceed coarsest_spacing");
    if (pkg_size < 2)
        throw ConfigError("pkg_size must be at least 2");
    requirePositive(trust_band_ratio, "trust_band_ratio");
    if (policy != "seq" && policy != "par")
        throw ConfigError("policy must be seq or par");
    if (threads < 1 || bench_threads < 1)
        throw ConfigError("thread counts must be at least 1");
    requirePositive(kernel_h_ratio, "kernel_h_ratio");
    requirePositive(clean_threshold, "clean_threshold");
    requirePositive(cfl, "cfl");
    if (reinit_steps < 0 || clean_max_rounds < 0 || relax_steps < 0)
        throw ConfigError("step counts must not be negative");
    requirePositive(particle_spacing, "particle_spacing");
    if (!(step_scale > 0.0 && step_scale <= 1.0))
        throw ConfigError("step_scale must lie in (0, 1]");
    if (jitter < 0.0)
        throw ConfigError("jitter must not be negative");
    if (particle_format != "ply" && particle_format != "csv")
        throw ConfigError("particle_format must be ply or csv");
    requirePositive(bench_resolution, "bench_resolution");
    if (bench_runs < 1)
        throw ConfigError("bench_runs must be at least 1");
}
//=================================================================================================//
RunConfig parseRunConfig(std::string_view text)
{
    RunConfig config;
    std::size_t line_number = 0;
    while (!text.empty())
    {
        const auto newline = text.find('\n');
        std::string_view line = text.substr(0, newline);
        text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto equals = line.find('=');
        if (equals == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_number) + ": expected key = value");
        const std::string_view key = trim(line.substr(0, equals));
        const std::string_view value = trim(line.substr(equals + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError("line " + std::to_string(line_number) + ": unknown key '" + std::string(key) + "'");
        try
        {
            it->second(config, value);
        }
        catch (const ConfigError &e)
        {
            throw ConfigError("line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}
//=================================================================================================//
RunConfig loadRunConfig(const std::filesystem::path &path)
{
    std::ifstream file(path);
    if (!file)
        throw ConfigError("cannot read config '" + path.string() + "'");
    std::ostringstream text;
    text << file.rdbuf();
    RunConfig config = parseRunConfig(text.str());
    config.base_directory = path.parent_path();
    return config;
}
} // namespace pkgrid
