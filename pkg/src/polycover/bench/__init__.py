"""Map files, synthetic maps, rendering and the benchmark harness."""
