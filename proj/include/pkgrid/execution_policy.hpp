#ifndef PKGRID_EXECUTION_POLICY_HPP
#define PKGRID_EXECUTION_POLICY_HPP

#include <cstddef>
#include <string>

namespace pkgrid
{
enum class ExecutionKind
{
    Sequential,
    ParallelHost,
    Device
};

/// In-process stand-in for an accelerator runtime. "Device" storage is a
/// separate host allocation, but every allocation and transfer is counted so
/// tests can observe when data actually migrates.
class DeviceBackend
{
  public:
    struct Counters
    {
        std::size_t allocations = 0;
        std::size_t host_to_device_copies = 0;
        std::size_t device_to_host_copies = 0;
        std::size_t bytes_to_device = 0;
        std::size_t bytes_to_host = 0;
    };

    void recordAllocation() { ++counters_.allocations; }
    void recordUpload(std::size_t bytes)
    {
        ++counters_.host_to_device_copies;
        counters_.bytes_to_device += bytes;
    }
    void recordDownload(std::size_t bytes)
    {
        ++counters_.device_to_host_copies;
        counters_.bytes_to_host += bytes;
    }
    const Counters &counters() const { return counters_; }

  private:
    Counters counters_;
};

struct ExecutionPolicy
{
    ExecutionKind kind = ExecutionKind::Sequential;
    int threads = 1;
    DeviceBackend *device = nullptr;

    static ExecutionPolicy sequential() { return {}; }
    static ExecutionPolicy parallelHost(int threads) { return {ExecutionKind::ParallelHost, threads, nullptr}; }
    static ExecutionPolicy onDevice(DeviceBackend &backend) { return {ExecutionKind::Device, 1, &backend}; }

    bool onHost() const { return kind != ExecutionKind::Device; }
};

/// Parses "seq" / "par" (the CLI spellings) into a host policy.
ExecutionPolicy parseHostPolicy(const std::string &name, int threads);

} // namespace pkgrid
#endif // PKGRID_EXECUTION_POLICY_HPP
