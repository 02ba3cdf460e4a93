@RunWith(RobolectricTestRunner.class)
public class MixedPositionProviderTest {
    private MixedPositionProvider mMixedPositionProvider;
    private LocationManager mLocationManager;
    private ShadowLocationManager mShadowLocationManager;

    @Before
    public void setUp() {
        mMixedPositionProvider = new MixedPositionProvider();
        mLocationManager = mock(LocationManager.class); 
        mShadowLocationManager = Shadow.extract(mLocationManager);
    }

    @Test
    @Config(sdk = Build.VERSION_CODES.M) // Before Android N
    public void testGpsStatusListenerBeforeN() {
        GpsStatus.Listener listener = mock(GpsStatus.Listener.class);
        mMixedPositionProvider.addGpsStatusListener(listener);
        verify(mLocationManager).addGpsStatusListener(listener);
        verifyNoMoreInteractions(mLocationManager);
    }

    @Test
    @Config(sdk = Build.VERSION_CODES.O) // After Android N
    public void testGpsStatusListenerAfterN() {
        GpsStatus.Listener listener = mock(GpsStatus.Listener.class);
        mMixedPositionProvider.addGpsStatusListener(listener);

        // Here, we could further verify the behavior of 
        // mGnssStatusCallback by simulating a callback
        verify(mLocationManager).registerGnssStatusCallback(
                            any(GnssStatus.Callback.class));
        verifyNoMoreInteractions(mLocationManager);
    }
}
