// Deprecated API to get external storage directory
File externalStorageDir = Environment.getExternalStorageDirectory();

// Recommended API to get external storage directory
File externalFilesDir = getExternalFilesDir(null);
