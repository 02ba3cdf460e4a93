package com.example.mixed;

import android.os.Vibrator;
import android.widget.TimePicker;

public class WakeUpController {
    private final TimePicker picker;
    private final Vibrator vibrator;

    public WakeUpController(TimePicker picker, Vibrator vibrator) {
        this.picker = picker;
        this.vibrator = vibrator;
    }

    public int wakeHour() {
        return picker.getCurrentHour();
    }

    public void buzz() {
        vibrator.vibrate(500L);
    }
}
