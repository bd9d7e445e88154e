import { defineConfig } from "vitest/config";

// runCli blocks on synchronous child processes; forks keep the runner's
// heartbeat RPC out of the blocked thread
export default defineConfig({
  test: {
    pool: "forks",
    fileParallelism: false,
    testTimeout: 120_000,
  },
});
