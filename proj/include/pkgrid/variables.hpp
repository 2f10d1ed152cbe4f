#ifndef PKGRID_VARIABLES_HPP
#define PKGRID_VARIABLES_HPP

#include "pkgrid/execution_policy.hpp"

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <typeindex>
#include <vector>

namespace pkgrid
{
/// Type-erased handle used by the registry for whole-assembly operations.
class VariableBase
{
  public:
    VariableBase(std::string name, std::size_t entry_width)
        : name_(std::move(name)), entry_width_(entry_width) {}
    virtual ~VariableBase() = default;

    const std::string &name() const { return name_; }
    std::size_t entryWidth() const { return entry_width_; }

    virtual std::type_index valueType() const = 0;
    virtual std::size_t numEntries() const = 0;
    virtual std::size_t hostBytes() const = 0;
    virtual void resizeEntries(std::size_t entries) = 0;
    virtual void synchronizeToHost() = 0;
    virtual bool hasDeviceMirror() const = 0;

  private:
    std::string name_;
    std::size_t entry_width_;
};

/// A flat array of values, one or several per entry, with an optional lazily
/// created device mirror. Entries are packages (mesh and meta variables) or
/// background cells.
template <typename T>
class DiscreteVariable : public VariableBase
{
  public:
    DiscreteVariable(std::string name, std::size_t entry_width, std::size_t entries)
        : VariableBase(std::move(name), entry_width), host_(entry_width * entries) {}

    std::type_index valueType() const override { return typeid(T); }
    std::size_t numEntries() const override { return host_.size() / entryWidth(); }
    std::size_t hostBytes() const override { return host_.size() * sizeof(T); }

    void resizeEntries(std::size_t entries) override
    {
        host_.resize(entries * entryWidth());
        if (device_)
            device_->data.resize(entries * entryWidth());
    }

    void synchronizeToHost() override
    {
        if (!device_)
            return;
        std::copy(device_->data.begin(), device_->data.end(), host_.begin());
        device_->backend->recordDownload(host_.size() * sizeof(T));
    }

    bool hasDeviceMirror() const override { return device_ != nullptr; }

    /// Storage resident for the policy. A device policy allocates and uploads on
    /// first request only; later requests return the same mirror.
    T *delegatedData(const ExecutionPolicy &policy)
    {
        if (policy.onHost())
            return host_.data();
        if (!device_ || device_->backend != policy.device)
        {
            device_ = std::make_unique<DeviceMirror>();
            device_->backend = policy.device;
            device_->backend->recordAllocation();
            device_->data = host_;
            device_->backend->recordUpload(host_.size() * sizeof(T));
        }
        return device_->data.data();
    }

    std::span<T> hostData() { return host_; }
    std::span<const T> hostData() const { return host_; }
    T *data() { return host_.data(); }
    const T *data() const { return host_.data(); }

    void fill(const T &value) { std::fill(host_.begin(), host_.end(), value); }

  private:
    struct DeviceMirror
    {
        DeviceBackend *backend = nullptr;
        std::vector<T> data;
    };

    std::vector<T> host_;
    std::unique_ptr<DeviceMirror> device_;
};

template <typename T>
using MeshVariable = DiscreteVariable<T>;
template <typename T>
using BackgroundVariable = DiscreteVariable<T>;
template <typename T>
using MetaVariable = DiscreteVariable<T>;

} // namespace pkgrid
#endif // PKGRID_VARIABLES_HPP
