import { defineConfig } from 'vitest/config';

export default defineConfig({
  base: '/ui/',
  build: { outDir: 'dist' },
  server: {
    proxy: { '/v1': 'http://127.0.0.1:8000' },
  },
  test: {
    environment: 'jsdom',
    include: ['tests/**/*.test.ts'],
  },
});
