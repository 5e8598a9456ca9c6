from adiapack.bench import bench_kernels, bench_sweep_scaling


def test_empty_sizes_gives_empty_records():
    assert bench_kernels([]) == []


def test_bench_records_smoke():
    records = bench_kernels([256], repeats=2, steps=5)
    assert {r.kernel for r in records} == {"nls_step", "scalar_step"}
    assert all(r.steps_per_second > 0 for r in records)
    assert all(r.grid_size == 256 for r in records)


def test_sweep_scaling_smoke():
    out = bench_sweep_scaling(n_jobs=2, threads=2, grid_size=512, steps=20)
    assert out["serial_seconds"] > 0
    assert out["parallel_seconds"] > 0
