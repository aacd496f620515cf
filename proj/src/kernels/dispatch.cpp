#include <cstdlib>
#include <string_view>

#include "damc/kernels.hpp"

namespace damc::kernels {

const KernelTable *avx2_table();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable &select() {
    const char *env = std::getenv("DAMC_KERNELS");
    const std::string_view choice = env ? env : "";
    if (choice == "scalar")
        return scalar();
    if (const KernelTable *vec = avx2())
        return *vec;
    return scalar();
}

} // namespace

const KernelTable *avx2() {
    static const KernelTable *table = cpu_has_avx2() ? avx2_table() : nullptr;
    return table;
}

const KernelTable &active() {
    static const KernelTable &table = select();
    return table;
}

} // namespace damc::kernels
