import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    environment: 'node',
    // test files spawn their own service instances on fixed ports
    fileParallelism: false,
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
