if (Build.VERSION.SDK_INT >= Build.VERSION_CODES.M) {
    // Preferred method for Android 6.0 (Marshmallow/API level 23)
    // and above.
    int currentHour = timepicker.getHour(); 
} else {
    // Legacy method for versions below Android 6.0.
    int currentHour = timepicker.getCurrentHour(); 
}
