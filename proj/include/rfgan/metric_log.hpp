#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rfgan {

// Time series of named scalar metrics. Serialized as CSV with header
// `step,metric,value`, one row per observation, LF line endings.
class MetricLog {
public:
    struct Row {
        std::int64_t step;
        std::string metric;
        double value;
    };

    void push(std::int64_t step, std::string_view metric, double value);

    const std::vector<Row>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }

    // Last recorded value of a metric; throws if absent.
    double last(std::string_view metric) const;
    bool has(std::string_view metric) const;
    std::vector<Row> series(std::string_view metric) const;

    std::string to_csv() const;
    void write_csv(const std::string& path) const;

private:
    std::vector<Row> rows_;
};

} // namespace rfgan
