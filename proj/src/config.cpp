#include "mtt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mtt {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::istringstream in(s);
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw std::invalid_argument("expected numbers, got: " + s);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

std::optional<std::string> ConfigFile::get(const std::string& section,
                                           const std::string& key) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) return std::nullopt;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    return kit->second;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (trim(v->substr(pos)).empty()) return d;
    } catch (...) {
    }
    throw std::invalid_argument("config key " + section + "." + key + ": not a number: " + *v);
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    const double d = get_double(section, key, fallback);
    if (d != std::floor(d))
        throw std::invalid_argument("config key " + section + "." + key + ": not an integer");
    return static_cast<int>(d);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("config key " + section + "." + key + ": not a boolean: " + *v);
}

RunnerParams load_runner_params(const ConfigFile& cfg) {
    RunnerParams params;
    params.scenario = default_scenario();
    ScenarioConfig& sc = params.scenario;

    sc.dt = cfg.get_double("scenario", "dt", sc.dt);
    sc.spacing = cfg.get_double("scenario", "spacing", sc.spacing);
    sc.p_d = cfg.get_double("scenario", "P_d", sc.p_d);
    sc.lambda_f = cfg.get_double("scenario", "lambda_f", sc.lambda_f);
    sc.sigma_z = cfg.get_double("scenario", "sigma_z", sc.sigma_z);
    sc.seed = static_cast<std::uint64_t>(cfg.get_double("scenario", "seed", 1.0));
    sc.truth_noise_q = cfg.get_double("scenario", "truth_noise_q", sc.truth_noise_q);

    if (const auto v = cfg.get("scenario", "region")) {
        const auto nums = parse_numbers(*v);
        if (nums.size() != 4)
            throw std::invalid_argument("scenario.region: expected x_min y_min x_max y_max");
        sc.region = Rect{nums[0], nums[1], nums[2], nums[3]};
    }

    if (const auto v = cfg.get("scenario", "segments")) {
        sc.segments.clear();
        for (const std::string& part : split(*v, '|')) {
            std::istringstream in(part);
            std::string kind;
            in >> kind;
            Segment seg;
            if (kind == "CV" || kind == "cv") {
                seg.kind = Segment::Kind::cv;
                if (!(in >> seg.duration))
                    throw std::invalid_argument("scenario.segments: CV needs a duration");
            } else if (kind == "CT" || kind == "ct") {
                seg.kind = Segment::Kind::ct;
                double omega_deg = 0.0;
                if (!(in >> seg.duration >> omega_deg))
                    throw std::invalid_argument("scenario.segments: CT needs duration and deg/s");
                seg.omega = omega_deg * M_PI / 180.0;
            } else {
                throw std::invalid_argument("scenario.segments: unknown kind " + kind);
            }
            sc.segments.push_back(seg);
        }
    }

    if (const auto v = cfg.get("scenario", "initial_states")) {
        sc.initial_states.clear();
        for (const std::string& part : split(*v, '|')) {
            const auto nums = parse_numbers(part);
            if (nums.size() != 4)
                throw std::invalid_argument("scenario.initial_states: expected px vx py vy");
            sc.initial_states.emplace_back(nums[0], nums[1], nums[2], nums[3]);
        }
    }

    params.window = cfg.get_int("tracker", "window", params.window);
    params.hypothesis_cap = cfg.get_int("tracker", "hypothesis_cap", params.hypothesis_cap);
    params.n_loss = cfg.get_int("tracker", "n_loss", params.n_loss);
    params.confirm_score = cfg.get_double("tracker", "confirm_score", params.confirm_score);
    params.miss_threshold = cfg.get_double("tracker", "miss_threshold", params.miss_threshold);
    params.confirm_threshold =
        cfg.get_double("tracker", "confirm_threshold", params.confirm_threshold);
    params.lambda_v = cfg.get_double("tracker", "lambda_v", params.lambda_v);
    params.gate_exclusion = cfg.get_double("tracker", "gate_exclusion", params.gate_exclusion);
    params.init_from_truth = cfg.get_bool("tracker", "init_from_truth", params.init_from_truth);
    params.enable_birth = cfg.get_bool("tracker", "enable_birth", params.enable_birth);
    params.max_new_tracks = cfg.get_int("tracker", "max_new_tracks", params.max_new_tracks);
    if (const auto v = cfg.get("tracker", "model_q")) {
        params.model_q = parse_numbers(*v);
        if (params.model_q.empty())
            throw std::invalid_argument("tracker.model_q: need at least one intensity");
    }

    params.ospa.p = cfg.get_double("ospa", "p", params.ospa.p);
    params.ospa.c = cfg.get_double("ospa", "c", params.ospa.c);
    return params;
}

std::vector<std::string> describe_params(const RunnerParams& params, double volume) {
    const ScenarioConfig& sc = params.scenario;
    std::vector<std::string> out;
    out.push_back("dt = " + format_double(sc.dt));
    out.push_back("P_d = " + format_double(sc.p_d));
    out.push_back("lambda_f = " + format_double(sc.lambda_f));
    out.push_back("sigma_z = " + format_double(sc.sigma_z));
    out.push_back("spacing = " + format_double(sc.spacing));
    out.push_back("seed = " + std::to_string(sc.seed));
    out.push_back("truth_noise_q = " + format_double(sc.truth_noise_q));
    out.push_back("volume = " + format_double(volume));
    {
        std::string seg = "segments =";
        for (const Segment& s : sc.segments) {
            seg += s.kind == Segment::Kind::cv
                       ? " CV " + std::to_string(s.duration)
                       : " CT " + std::to_string(s.duration) + " " +
                             format_double(s.omega * 180.0 / M_PI);
            seg += " |";
        }
        if (!sc.segments.empty()) seg.pop_back();
        out.push_back(seg);
    }
    {
        std::string init = "initial_states =";
        for (const StateVec& x : sc.initial_states) {
            for (int i = 0; i < 4; ++i) init += " " + format_double(x(i));
            init += " |";
        }
        if (!sc.initial_states.empty()) init.pop_back();
        out.push_back(init);
    }
    out.push_back("window = " + std::to_string(params.window));
    out.push_back("hypothesis_cap = " + std::to_string(params.hypothesis_cap));
    out.push_back("n_loss = " + std::to_string(params.n_loss));
    out.push_back("confirm_score = " + format_double(params.confirm_score));
    out.push_back("miss_threshold = " + format_double(params.miss_threshold));
    out.push_back("confirm_threshold = " + format_double(params.confirm_threshold));
    out.push_back("lambda_v = " + format_double(params.lambda_v));
    out.push_back("gate_exclusion = " + format_double(params.gate_exclusion));
    {
        std::string mq = "model_q =";
        for (double q : params.model_q) mq += " " + format_double(q);
        out.push_back(mq);
    }
    out.push_back("init_from_truth = " + std::string(params.init_from_truth ? "true" : "false"));
    out.push_back("enable_birth = " + std::string(params.enable_birth ? "true" : "false"));
    out.push_back("max_new_tracks = " + std::to_string(params.max_new_tracks));
    out.push_back("ospa_p = " + format_double(params.ospa.p));
    out.push_back("ospa_c = " + format_double(params.ospa.c));
    return out;
}

}  // namespace mtt
