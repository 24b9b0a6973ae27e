#include "gave/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gave/error.hpp"

namespace gave {

LltConfig LltConfig::derived(std::size_t n_grid, std::size_t n_group, std::size_t n_scales, std::size_t d_c) {
    LltConfig cfg;
    cfg.d_c = d_c;
    cfg.n_grid = n_grid;
    cfg.n_group = n_group;
    cfg.n_scales = n_scales;
    cfg.d_d = n_group == 0 ? 0 : n_grid * d_c * (d_c / n_group);
    cfg.validate();
    return cfg;
}

void LltConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "LltConfig: " + msg); };
    if (d_c == 0 || d_d == 0 || n_grid == 0 || n_group == 0 || k == 0) fail("all extents must be positive");
    if (d_d % n_grid != 0) fail("d_d must be divisible by n_grid");
    if (d_c % n_group != 0) fail("d_c must be divisible by n_group");
    if (d_d / n_grid != d_c * (d_c / n_group))
        fail("d_d / n_grid (" + std::to_string(d_d / n_grid) + ") must equal d_c * (d_c / n_group) (" +
             std::to_string(d_c * (d_c / n_group)) + ")");
    if (n_scales < 1 || n_scales > 3) fail("n_scales must be 1, 2 or 3");
}

void JbfParams::validate() const {
    if (window_radius <= 0 || !(sigma_spatial > 0) || !(sigma_range > 0) || max_iterations <= 0)
        throw Error(ErrorKind::InvalidArgument, "JBF parameters must be positive");
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw Error(ErrorKind::Format, "bad value '" + text + "' for key '" + key + "'");
    return value;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    auto size = [&] { return parse_number<std::size_t>(key, value); };
    auto real = [&] { return parse_number<double>(key, value); };
    auto rederive = [this] {
        if (!d_d_pinned && llt.n_group != 0 && llt.d_c % llt.n_group == 0)
            llt.d_d = llt.n_grid * llt.d_c * (llt.d_c / llt.n_group);
    };

    if (key == "d_c") llt.d_c = size(), rederive();
    else if (key == "d_d") llt.d_d = size(), d_d_pinned = true;
    else if (key == "n_grid") llt.n_grid = size(), rederive();
    else if (key == "n_group") llt.n_group = size(), rederive();
    else if (key == "n_scales") llt.n_scales = size();
    else if (key == "k") llt.k = size();
    else if (key == "jbf.window_radius") jbf.window_radius = parse_number<int>(key, value);
    else if (key == "jbf.sigma_spatial") jbf.sigma_spatial = real();
    else if (key == "jbf.sigma_range") jbf.sigma_range = real();
    else if (key == "jbf.max_iterations") jbf.max_iterations = parse_number<int>(key, value);
    else if (key == "norm.scale") normalization.scale = real();
    else if (key == "norm.offset") normalization.offset = real();
    else if (key == "match.max_ref_points") match.max_ref_points = size();
    else if (key == "align.n_hypotheses") align.n_hypotheses = size();
    else if (key == "align.subset_size") align.subset_size = size();
    else if (key == "align.inlier_tau") align.inlier_tau = real();
    else if (key == "align.seed") align.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "loss.photometric") loss.photometric = real();
    else if (key == "loss.depth") loss.depth = real();
    else if (key == "loss.correspondence") loss.correspondence = real();
    else throw Error(ErrorKind::Format, "unknown config key '" + key + "'");
}

PipelineConfig PipelineConfig::parse(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Format, "config line " + std::to_string(lineno) + ": expected key=value");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error(e.kind(), "config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
    return {
        {"d_c", std::to_string(llt.d_c)},
        {"d_d", std::to_string(llt.d_d)},
        {"n_grid", std::to_string(llt.n_grid)},
        {"n_group", std::to_string(llt.n_group)},
        {"n_scales", std::to_string(llt.n_scales)},
        {"k", std::to_string(llt.k)},
        {"jbf.window_radius", std::to_string(jbf.window_radius)},
        {"jbf.sigma_spatial", fmt_double(jbf.sigma_spatial)},
        {"jbf.sigma_range", fmt_double(jbf.sigma_range)},
        {"jbf.max_iterations", std::to_string(jbf.max_iterations)},
        {"norm.scale", fmt_double(normalization.scale)},
        {"norm.offset", fmt_double(normalization.offset)},
        {"match.max_ref_points", std::to_string(match.max_ref_points)},
        {"align.n_hypotheses", std::to_string(align.n_hypotheses)},
        {"align.subset_size", std::to_string(align.subset_size)},
        {"align.inlier_tau", fmt_double(align.inlier_tau)},
        {"align.seed", std::to_string(align.seed)},
        {"loss.photometric", fmt_double(loss.photometric)},
        {"loss.depth", fmt_double(loss.depth)},
        {"loss.correspondence", fmt_double(loss.correspondence)},
    };
}

void PipelineConfig::validate() const {
    llt.validate();
    jbf.validate();
    if (match.max_ref_points == 0) throw Error(ErrorKind::InvalidArgument, "match.max_ref_points must be positive");
    if (align.n_hypotheses == 0 || align.subset_size < 3 || !(align.inlier_tau > 0))
        throw Error(ErrorKind::InvalidArgument, "alignment parameters out of range");
}

}  // namespace gave
