#include "rfgan/metric_log.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rfgan/common.hpp"

namespace rfgan {

void MetricLog::push(std::int64_t step, std::string_view metric, double value) {
    require(std::isfinite(value),
            "MetricLog: non-finite value for '" + std::string(metric) + "'");
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
        if (it->metric == metric) {
            require(it->step <= step, "MetricLog: step went backwards for '" +
                                          std::string(metric) + "'");
            break;
        }
    }
    rows_.push_back({step, std::string(metric), value});
}

double MetricLog::last(std::string_view metric) const {
    for (auto it = rows_.rbegin(); it != rows_.rend(); ++it)
        if (it->metric == metric) return it->value;
    fail("MetricLog: no rows for '" + std::string(metric) + "'");
}

bool MetricLog::has(std::string_view metric) const {
    for (const auto& r : rows_)
        if (r.metric == metric) return true;
    return false;
}

std::vector<MetricLog::Row> MetricLog::series(std::string_view metric) const {
    std::vector<Row> out;
    for (const auto& r : rows_)
        if (r.metric == metric) out.push_back(r);
    return out;
}

std::string MetricLog::to_csv() const {
    std::string out = "step,metric,value\n";
    char buf[64];
    for (const auto& r : rows_) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(r.step));
        out += buf;
        out += ',';
        out += r.metric;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.10g", r.value);
        out += buf;
        out += '\n';
    }
    return out;
}

void MetricLog::write_csv(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(bool(os), "MetricLog: cannot open '" + path + "'");
    const std::string csv = to_csv();
    os.write(csv.data(), std::streamsize(csv.size()));
    require(bool(os), "MetricLog: write failed for '" + path + "'");
}

} // namespace rfgan
